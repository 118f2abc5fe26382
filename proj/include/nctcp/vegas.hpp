#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "nctcp/knowledge_space.hpp"

namespace nctcp {

struct VegasConfig {
    double alpha = 28.0;  // packets
    double beta = 30.0;   // packets
    double gamma = 2.0;   // slow-start exit threshold, packets
    double receive_window = 100.0;  // cwnd cap, packets
    double min_rto_s = 1.0;
    double initial_rto_s = 3.0;
    double max_rto_s = 64.0;
    bool double_every_other_rtt = true;  // slow-start doubling cadence
};

// Delay-based congestion control. The window moves on the gap between the
// expected rate cwnd/base_rtt and the actual rate cwnd/rtt:
//   diff = cwnd * (1 - base_rtt/rtt)   [packets sitting in queues]
// grows by one packet per RTT while diff < alpha, shrinks while diff > beta.
// Losses never touch the window directly; duplicate acks are no-ops.
class VegasController {
  public:
    explicit VegasController(const VegasConfig& cfg = {}) : cfg_(cfg), rto_(cfg.initial_rto_s) {
        if (cfg_.alpha > cfg_.beta) throw std::invalid_argument("vegas: alpha > beta");
    }

    double cwnd() const { return cwnd_; }
    double base_rtt() const { return base_rtt_; }
    double srtt() const { return srtt_; }
    double rto() const { return rto_; }
    bool in_slow_start() const { return in_slow_start_; }

    bool can_send(std::uint64_t inflight) const {
        return inflight < static_cast<std::uint64_t>(std::floor(cwnd_));
    }

    // One accepted RTT measurement. `acked` is the highest cumulatively
    // acknowledged packet, `next_index` the next index the transport would
    // send; together they delimit the once-per-RTT adjustment epochs.
    void on_rtt_sample(double rtt, PacketIndex acked, PacketIndex next_index) {
        if (rtt <= 0.0) throw std::invalid_argument("vegas: non-positive rtt sample");
        base_rtt_ = std::min(base_rtt_, rtt);

        if (!have_srtt_) {
            srtt_ = rtt;
            rttvar_ = rtt / 2.0;
            have_srtt_ = true;
        } else {
            rttvar_ += (std::abs(srtt_ - rtt) - rttvar_) / 4.0;
            srtt_ += (rtt - srtt_) / 8.0;
        }
        rto_ = std::clamp(srtt_ + 4.0 * rttvar_, cfg_.min_rto_s, cfg_.max_rto_s);

        if (acked >= epoch_end_) {
            adjust(rtt);
            epoch_end_ = next_index;
        }
    }

    // Conservative restart: fixed window of 2, doubled (capped) backoff,
    // slow start re-entered.
    void on_timeout() {
        cwnd_ = 2.0;
        rto_ = std::min(rto_ * 2.0, cfg_.max_rto_s);
        in_slow_start_ = true;
        ss_phase_ = 0;
        epoch_end_ = 0;
    }

  private:
    void adjust(double rtt) {
        double diff = cwnd_ * (1.0 - base_rtt_ / rtt);
        if (in_slow_start_) {
            if (diff > cfg_.gamma) {
                in_slow_start_ = false;
            } else {
                ++ss_phase_;
                if (!cfg_.double_every_other_rtt || ss_phase_ % 2 == 0)
                    cwnd_ = std::min(cwnd_ * 2.0, cfg_.receive_window);
                return;
            }
        }
        if (diff < cfg_.alpha)
            cwnd_ += 1.0;
        else if (diff > cfg_.beta)
            cwnd_ -= 1.0;
        cwnd_ = std::clamp(cwnd_, 2.0, cfg_.receive_window);
    }

    VegasConfig cfg_;
    double cwnd_ = 2.0;
    double base_rtt_ = std::numeric_limits<double>::infinity();
    double srtt_ = 0.0, rttvar_ = 0.0;
    bool have_srtt_ = false;
    double rto_;
    bool in_slow_start_ = true;
    int ss_phase_ = 0;
    PacketIndex epoch_end_ = 0;  // adjust again once acks pass this index
};

}  // namespace nctcp
