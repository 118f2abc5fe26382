#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "nctcp/wire.hpp"

namespace nctcp {

// Ack surfaced to the transport after the coding layer rewrites it: a
// cumulative sequence number plus the transmit time the RTT sample must be
// measured against.
struct TransportAck {
    PacketIndex ack_seq = 0;     // next packet expected by the sink
    double rtt_echo_time = 0.0;  // transmit time of serial prev_serial_num + 1
};

// Source-side coding layer. Buffers transport packets into the coding
// window, emits `redundancy` random linear combinations per arriving packet
// on average, and matches incoming acks to the transmission that carried the
// acked degree of freedom.
template <class Field>
class CodedSender {
  public:
    struct Options {
        double redundancy = 1.0;  // combinations per transport packet, >= 1
        std::size_t payload_bytes = 1000;
        std::uint64_t seed = 1;
    };

    struct TxAction {
        bool passthrough = false;  // control packet: forward unmodified
        std::vector<CodedSegment> segments;
    };

    explicit CodedSender(const Options& opt)
        : opt_(opt), rng_(opt.seed) {
        if (opt_.redundancy < 1.0)
            throw std::invalid_argument("CodedSender: redundancy must be >= 1");
    }

    PacketIndex window_base() const { return window_base_; }
    std::size_t window_size() const { return window_.size(); }
    std::uint32_t tx_serial_num() const { return tx_serial_num_; }
    double accumulator() const { return num_; }
    std::uint64_t anomalies() const { return anomalies_; }

    // Packet handed down by the transport. New data packets join the coding
    // window; packets already buffered (timeout retransmissions) do not,
    // but still earn their share of coded transmissions.
    TxAction on_tcp_packet(PacketIndex index, std::span<const std::uint8_t> payload,
                           bool is_control, double now) {
        TxAction action;
        if (is_control) {
            action.passthrough = true;
            return action;
        }
        if (index < window_base_)
            throw std::invalid_argument("CodedSender: packet below the coding window");
        PacketIndex next = window_base_ + static_cast<PacketIndex>(window_.size());
        if (index > next)
            throw std::invalid_argument("CodedSender: out-of-order packet from transport");
        if (index == next) {
            if (payload.size() != opt_.payload_bytes)
                throw std::invalid_argument("CodedSender: bad payload length");
            window_.emplace_back(payload.begin(), payload.end());
        }

        num_ += opt_.redundancy;
        int emit = static_cast<int>(num_);
        num_ -= emit;
        action.segments.reserve(static_cast<std::size_t>(emit));
        for (int i = 0; i < emit; ++i) action.segments.push_back(make_segment(now));
        return action;
    }

    struct AckResponse {
        TransportAck ack;
        // A duplicate ack means one received combination carried no new
        // information; one fresh combination replaces the wasted degree of
        // freedom so the sink's decoder cannot fall behind for good.
        std::vector<CodedSegment> repair;
    };

    // Rewrites a coded ack into the transport's view: the RTT echo is the
    // transmit time of serial prev+1, the oldest attempt at the acked degree
    // of freedom. Acked packets leave the coding window; transmit-time
    // entries at or below prev are no longer matchable and are pruned.
    AckResponse on_coded_ack(const CodedAck& ack, double now) {
        AckResponse out;
        out.ack.ack_seq = ack.ack_seq;
        out.ack.rtt_echo_time = echo_time(ack.prev_serial_num);

        bool duplicate = ack.ack_seq <= last_ack_seq_;
        last_ack_seq_ = std::max(last_ack_seq_, ack.ack_seq);

        while (!window_.empty() && window_base_ < ack.ack_seq) {
            window_.pop_front();
            ++window_base_;
        }
        while (tx_base_ <= ack.prev_serial_num && !tx_times_.empty()) {
            tx_times_.pop_front();
            ++tx_base_;
        }
        // Self-clocked: while one repair is unresolved (no ack triggered by
        // an arrival at or past its serial), further duplicates stay quiet.
        if (duplicate && !window_.empty() && ack.prev_serial_num >= repair_barrier_) {
            out.repair.push_back(make_segment(now));
            repair_barrier_ = tx_serial_num_;
        }
        return out;
    }

  private:
    CodedSegment make_segment(double now) {
        CodedSegment seg;
        seg.tx_serial_num = ++tx_serial_num_;
        seg.window_base = window_base_;
        seg.coeffs = draw_coeffs(window_.size());
        seg.payload.assign(opt_.payload_bytes, 0);
        for (std::size_t i = 0; i < window_.size(); ++i)
            Field::axpy_bytes(std::span<std::uint8_t>(seg.payload), seg.coeffs[i],
                              std::span<const std::uint8_t>(window_[i]));
        tx_times_.push_back(now);
        return seg;
    }

    // Uniform over the whole field, zero included. A degenerate all-zero
    // vector is redrawn once and otherwise sent as-is.
    std::vector<std::uint8_t> draw_coeffs(std::size_t n) {
        std::vector<std::uint8_t> c(n);
        for (int attempt = 0; attempt < 2; ++attempt) {
            bool all_zero = true;
            for (auto& e : c) {
                e = static_cast<std::uint8_t>(rng_() & Field::kMax);
                all_zero &= (e == 0);
            }
            if (!all_zero) break;
        }
        return c;
    }

    double echo_time(std::uint32_t prev_serial) {
        if (tx_times_.empty()) {
            ++anomalies_;
            return 0.0;
        }
        std::uint32_t want = prev_serial + 1;
        std::uint32_t last = tx_base_ + static_cast<std::uint32_t>(tx_times_.size()) - 1;
        if (want > last) {  // beyond anything transmitted: clamp to the latest
            ++anomalies_;
            want = last;
        } else if (want < tx_base_) {  // already pruned: clamp to the oldest kept
            ++anomalies_;
            want = tx_base_;
        }
        return tx_times_[want - tx_base_];
    }

    Options opt_;
    std::deque<std::vector<std::uint8_t>> window_;  // payloads, window_base_ first
    PacketIndex window_base_ = 1;
    std::uint32_t tx_serial_num_ = 0;
    double num_ = 0.0;  // fractional transmission credit, in [0, 1) between events
    std::deque<double> tx_times_;  // transmit times for serials tx_base_..
    std::uint32_t tx_base_ = 1;
    PacketIndex last_ack_seq_ = 0;
    std::uint32_t repair_barrier_ = 0;
    std::uint64_t anomalies_ = 0;
    std::mt19937_64 rng_;
};

}  // namespace nctcp
