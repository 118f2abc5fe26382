#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <random>
#include <stdexcept>
#include <vector>

#include "nctcp/random.hpp"

namespace nctcp::sim {

using SimTime = double;  // seconds of simulated time

// Cancellation token for a scheduled event (timers mostly).
class EventHandle {
  public:
    EventHandle() = default;
    explicit EventHandle(std::shared_ptr<bool> dead) : dead_(std::move(dead)) {}
    void cancel() {
        if (dead_) *dead_ = true;
    }
    bool pending() const { return dead_ && !*dead_; }

  private:
    std::shared_ptr<bool> dead_;
};

// Deterministic event loop: events run in (time, schedule-order) order, so
// identical call sequences replay identically.
class EventQueue {
  public:
    SimTime now() const { return now_; }

    EventHandle schedule(SimTime delay, std::function<void()> action) {
        if (delay < 0.0) throw std::invalid_argument("EventQueue::schedule: negative delay");
        auto dead = std::make_shared<bool>(false);
        heap_.push(Entry{now_ + delay, next_seq_++, std::move(action), dead});
        return EventHandle(dead);
    }

    // Executes all events up to and including `until`, then advances the
    // clock to `until`.
    void run_until(SimTime until) {
        while (!heap_.empty() && heap_.top().time <= until) {
            Entry e = heap_.top();
            heap_.pop();
            now_ = e.time;
            if (!*e.dead) e.action();
        }
        now_ = until;
    }

    bool empty() const { return heap_.empty(); }

  private:
    struct Entry {
        SimTime time;
        std::uint64_t seq;
        std::function<void()> action;
        std::shared_ptr<bool> dead;
        bool operator>(const Entry& o) const {
            if (time != o.time) return time > o.time;
            return seq > o.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
    std::uint64_t next_seq_ = 0;
    SimTime now_ = 0.0;
};

struct LinkStats {
    std::uint64_t offered = 0;
    std::uint64_t delivered = 0;
    std::uint64_t erased = 0;          // Bernoulli loss at transmit time
    std::uint64_t buffer_dropped = 0;  // drop-tail overflow
};

// Unidirectional FIFO drop-tail link: fixed bandwidth, propagation delay and
// i.i.d. packet erasure. The erasure is drawn when serialization finishes,
// so lost packets still consume link capacity.
template <class P>
class Link {
  public:
    struct Config {
        double bandwidth_bps = 1e6;
        double prop_delay_s = 0.1;
        std::size_t buffer_packets = 200;
        double loss_prob = 0.0;
        std::uint64_t seed = 1;
    };

    Link(EventQueue& ev, const Config& cfg, std::function<void(P&&)> deliver)
        : ev_(ev), cfg_(cfg), deliver_(std::move(deliver)), rng_(cfg.seed) {}

    void transmit(P pkt, std::int64_t size_bits) {
        ++stats_.offered;
        if (queue_.size() >= cfg_.buffer_packets) {
            ++stats_.buffer_dropped;
            return;
        }
        queue_.push_back({std::move(pkt), size_bits});
        if (!busy_) start_service();
    }

    const LinkStats& stats() const { return stats_; }
    std::size_t queued() const { return queue_.size() + (busy_ ? 1 : 0); }
    std::uint64_t propagating() const { return propagating_; }

  private:
    struct Queued {
        P pkt;
        std::int64_t size_bits;
    };

    void start_service() {
        busy_ = true;
        in_service_ = std::move(queue_.front());
        queue_.pop_front();
        double ser = static_cast<double>(in_service_.size_bits) / cfg_.bandwidth_bps;
        ev_.schedule(ser, [this] { finish_service(); });
    }

    void finish_service() {
        Queued q = std::move(in_service_);
        if (to_unit_interval(rng_()) < cfg_.loss_prob) {
            ++stats_.erased;
        } else {
            ++propagating_;
            auto pkt = std::make_shared<P>(std::move(q.pkt));
            ev_.schedule(cfg_.prop_delay_s, [this, pkt]() mutable {
                --propagating_;
                ++stats_.delivered;
                deliver_(std::move(*pkt));
            });
        }
        if (!queue_.empty())
            start_service();
        else
            busy_ = false;
    }

    EventQueue& ev_;
    Config cfg_;
    std::function<void(P&&)> deliver_;
    std::mt19937_64 rng_;
    std::deque<Queued> queue_;
    Queued in_service_{};
    bool busy_ = false;
    std::uint64_t propagating_ = 0;
    LinkStats stats_;
};

}  // namespace nctcp::sim
