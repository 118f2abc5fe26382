#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nctcp/metrics.hpp"
#include "nctcp/receiver.hpp"
#include "nctcp/sender.hpp"
#include "nctcp/sim.hpp"
#include "nctcp/vegas.hpp"
#include "nctcp/wire.hpp"

namespace nctcp::net {

// One unit travelling a link: either a transport-level packet/ack (the
// uncoded baseline and connection-management control) or an encoded coding
// layer message.
struct Frame {
    enum class Kind : std::uint8_t { data, ack, coded_segment, coded_ack };
    Kind kind = Kind::data;
    int flow = 0;
    bool control = false;
    PacketIndex index = 0;  // data: packet index; ack: cumulative next-expected
    double tsval = 0.0;     // data: transmit timestamp
    double tsecr = 0.0;     // ack: echoed timestamp
    std::vector<std::uint8_t> bytes;  // data payload, or the encoded message
    std::int64_t size_bits = 0;
};

struct NetConfig {
    int hops = 4;  // tandem links; hops+1 nodes, flows run end to end
    double bandwidth_bps = 1e6;
    double prop_delay_s = 0.1;
    std::size_t buffer_packets = 200;
    double loss_prob = 0.0;  // per link, both directions, data and acks alike
    std::size_t packet_bytes = 1000;
    std::size_t ack_bytes = 40;
    bool include_overhead = false;  // add coding headers to serialization time
};

struct FlowConfig {
    int id = 0;
    bool coded = true;  // false: plain delay-based transport, no coding layer
    double start_s = 0.5;
    double redundancy = 1.0;
    bool carry_payloads = false;  // move and verify real payload bytes
    std::size_t max_span = 200;
    VegasConfig vegas;
};

// A source/sink endpoint pair bound to opposite ends of the chain. The
// transport above is identical for both protocols: a window of unacked
// packet indices gated by the congestion controller, cumulative acks, one
// timeout retransmission of the oldest unacked packet. The coded variant
// slips the coding shim between that transport and the wire.
class Flow {
  public:
    Flow(sim::EventQueue& ev, const NetConfig& net, const FlowConfig& cfg, std::uint64_t seed,
         std::function<void(Frame&&)> to_forward, std::function<void(Frame&&)> to_reverse)
        : ev_(ev), net_(net), cfg_(cfg), vegas_(cfg.vegas),
          to_forward_(std::move(to_forward)), to_reverse_(std::move(to_reverse)),
          payload_seed_(derive_seed(seed, 7)) {
        if (cfg_.coded) {
            CodedSender<Gf256>::Options so;
            so.redundancy = cfg_.redundancy;
            so.payload_bytes = carried_bytes();
            so.seed = derive_seed(seed, 11);
            shim_tx_.emplace(so);
            CodedReceiver<Gf256>::Options ro;
            ro.payload_bytes = carried_bytes();
            ro.max_span = cfg_.max_span;
            shim_rx_.emplace(ro);
        }
    }

    void start() {
        ev_.schedule(cfg_.start_s - ev_.now(), [this] { send_syn(); });
    }

    // --- metrics -----------------------------------------------------------
    std::uint64_t delivered_packets() const { return delivered_packets_; }
    double cwnd() const { return vegas_.cwnd(); }
    double last_rtt() const { return last_rtt_; }
    std::uint64_t dup_acks() const { return dup_acks_; }
    std::uint64_t timeouts() const { return timeouts_; }
    std::uint64_t payload_errors() const { return payload_errors_; }
    std::uint64_t shim_rejected() const { return shim_rx_ ? shim_rx_->segments_rejected() : 0; }
    std::uint64_t acked() const { return acked_; }
    std::uint64_t sent() const { return next_index_ - 1; }
    std::size_t rx_max_rows() const { return shim_rx_ ? shim_rx_->max_rows() : 0; }
    std::size_t rx_max_span() const { return shim_rx_ ? shim_rx_->max_span() : 0; }
    const VegasController& vegas() const { return vegas_; }

    // --- frames delivered by the chain --------------------------------------
    void source_receive(Frame&& f) {
        if (f.control) {
            if (!established_) {
                established_ = true;
                cancel_rto();
                pump();
            }
            return;
        }
        if (f.kind == Frame::Kind::coded_ack) {
            auto ack = decode_ack(f.bytes);
            if (!ack) return;
            auto resp = shim_tx_->on_coded_ack(*ack, ev_.now());
            for (CodedSegment& seg : resp.repair) {
                Frame out;
                out.kind = Frame::Kind::coded_segment;
                out.flow = cfg_.id;
                out.size_bits = data_bits(seg.coeffs.size());
                out.bytes = encode_segment(seg);
                to_forward_(std::move(out));
            }
            transport_ack(resp.ack.ack_seq, resp.ack.rtt_echo_time);
        } else if (f.kind == Frame::Kind::ack) {
            transport_ack(f.index, f.tsecr);
        }
    }

    void sink_receive(Frame&& f) {
        if (f.control) {  // connection management crosses the coding layer untouched
            Frame ack;
            ack.kind = Frame::Kind::ack;
            ack.flow = cfg_.id;
            ack.control = true;
            ack.size_bits = static_cast<std::int64_t>(net_.ack_bytes) * 8;
            to_reverse_(std::move(ack));
            return;
        }
        if (f.kind == Frame::Kind::coded_segment) {
            auto seg = decode_segment(f.bytes, carried_bytes());
            if (!seg) return;  // malformed: an erasure
            auto res = shim_rx_->on_coded_segment(*seg);
            for (auto& d : res.delivered) deliver(d.index, d.payload);
            if (res.ack) {
                Frame ack;
                ack.kind = Frame::Kind::coded_ack;
                ack.flow = cfg_.id;
                ack.bytes = encode_ack(*res.ack);
                ack.size_bits = ack_bits();
                to_reverse_(std::move(ack));
            }
        } else if (f.kind == Frame::Kind::data) {
            plain_sink_data(f);
        }
    }

  private:
    std::size_t carried_bytes() const { return cfg_.carry_payloads ? net_.packet_bytes : 0; }

    std::int64_t data_bits(std::size_t coeff_count) const {
        std::int64_t bits = static_cast<std::int64_t>(net_.packet_bytes) * 8;
        if (net_.include_overhead && cfg_.coded)
            bits += static_cast<std::int64_t>(12 + coeff_count) * 8;
        return bits;
    }

    std::int64_t ack_bits() const {
        std::int64_t bits = static_cast<std::int64_t>(net_.ack_bytes) * 8;
        if (net_.include_overhead && cfg_.coded) bits += 10 * 8;
        return bits;
    }

    std::vector<std::uint8_t> payload_for(PacketIndex idx) const {
        std::vector<std::uint8_t> p(carried_bytes());
        std::uint64_t s = payload_seed_ ^ (static_cast<std::uint64_t>(idx) * 0x9E3779B97F4A7C15ULL);
        for (std::size_t i = 0; i < p.size(); i += 8) {
            std::uint64_t w = splitmix64(s);
            for (std::size_t b = 0; b < 8 && i + b < p.size(); ++b)
                p[i + b] = static_cast<std::uint8_t>(w >> (8 * b));
        }
        return p;
    }

    // --- source side ---------------------------------------------------------
    void send_syn() {
        Frame syn;
        syn.kind = Frame::Kind::data;
        syn.flow = cfg_.id;
        syn.control = true;
        syn.size_bits = static_cast<std::int64_t>(net_.ack_bytes) * 8;
        to_forward_(std::move(syn));
        arm_rto();
    }

    std::uint64_t inflight() const { return (next_index_ - 1) - acked_; }

    void pump() {
        while (established_ && vegas_.can_send(inflight())) {
            PacketIndex idx = next_index_++;
            send_data(idx);
        }
        if (inflight() > 0) arm_rto_if_idle();
    }

    void send_data(PacketIndex idx) {
        auto payload = payload_for(idx);
        if (cfg_.coded) {
            auto action = shim_tx_->on_tcp_packet(idx, payload, false, ev_.now());
            for (CodedSegment& seg : action.segments) {
                Frame f;
                f.kind = Frame::Kind::coded_segment;
                f.flow = cfg_.id;
                f.size_bits = data_bits(seg.coeffs.size());
                f.bytes = encode_segment(seg);
                to_forward_(std::move(f));
            }
        } else {
            Frame f;
            f.kind = Frame::Kind::data;
            f.flow = cfg_.id;
            f.index = idx;
            f.tsval = ev_.now();
            f.bytes = std::move(payload);
            f.size_bits = data_bits(0);
            to_forward_(std::move(f));
        }
    }

    void transport_ack(PacketIndex ack_seq, double echo_ts) {
        if (ack_seq >= acked_ + 2) {  // advances the cumulative frontier
            acked_ = ack_seq - 1;
            double rtt = ev_.now() - echo_ts;
            last_rtt_ = rtt;
            vegas_.on_rtt_sample(rtt, acked_, next_index_);
            cancel_rto();
            pump();
        } else {
            ++dup_acks_;  // duplicates never shrink the window or retransmit
        }
    }

    void arm_rto() {
        cancel_rto();
        rto_timer_ = ev_.schedule(vegas_.rto(), [this] { on_rto(); });
    }

    void arm_rto_if_idle() {
        if (!rto_timer_.pending()) arm_rto();
    }

    void cancel_rto() { rto_timer_.cancel(); }

    void on_rto() {
        ++timeouts_;
        vegas_.on_timeout();
        if (!established_) {
            send_syn();
            return;
        }
        if (inflight() > 0) {
            send_data(acked_ + 1);  // oldest unacked; the shim re-emits, never re-buffers
            arm_rto();
        }
    }

    // --- plain sink ----------------------------------------------------------
    void plain_sink_data(const Frame& f) {
        if (f.index == next_expected_) {
            deliver(f.index, f.bytes);
            ++next_expected_;
            while (!ooo_.empty() && ooo_.begin()->first == next_expected_) {
                deliver(ooo_.begin()->first, ooo_.begin()->second);
                ooo_.erase(ooo_.begin());
                ++next_expected_;
            }
        } else if (f.index > next_expected_ &&
                   f.index < next_expected_ + static_cast<PacketIndex>(cfg_.vegas.receive_window)) {
            ooo_.emplace(f.index, f.bytes);
        }
        Frame ack;
        ack.kind = Frame::Kind::ack;
        ack.flow = cfg_.id;
        ack.index = next_expected_;
        ack.tsecr = f.tsval;
        ack.size_bits = ack_bits();
        to_reverse_(std::move(ack));
    }

    void deliver(PacketIndex idx, const std::vector<std::uint8_t>& payload) {
        ++delivered_packets_;
        if (cfg_.carry_payloads && payload != payload_for(idx)) ++payload_errors_;
    }

    sim::EventQueue& ev_;
    NetConfig net_;
    FlowConfig cfg_;
    VegasController vegas_;
    std::function<void(Frame&&)> to_forward_;
    std::function<void(Frame&&)> to_reverse_;
    std::uint64_t payload_seed_;

    // source
    std::optional<CodedSender<Gf256>> shim_tx_;
    bool established_ = false;
    PacketIndex next_index_ = 1;
    PacketIndex acked_ = 0;
    sim::EventHandle rto_timer_;
    double last_rtt_ = 0.0;
    std::uint64_t dup_acks_ = 0;
    std::uint64_t timeouts_ = 0;

    // sink
    std::optional<CodedReceiver<Gf256>> shim_rx_;
    PacketIndex next_expected_ = 1;
    std::map<PacketIndex, std::vector<std::uint8_t>> ooo_;
    std::uint64_t delivered_packets_ = 0;
    std::uint64_t payload_errors_ = 0;
};

// The tandem chain: hops forward links and hops reverse links, shared by all
// flows. Data frames ride the forward direction end to end; acks ride back.
class Network {
  public:
    Network(sim::EventQueue& ev, const NetConfig& cfg, std::uint64_t master_seed)
        : ev_(ev), cfg_(cfg) {
        sim::Link<Frame>::Config lc;
        lc.bandwidth_bps = cfg.bandwidth_bps;
        lc.prop_delay_s = cfg.prop_delay_s;
        lc.buffer_packets = cfg.buffer_packets;
        lc.loss_prob = cfg.loss_prob;
        forward_.reserve(static_cast<std::size_t>(cfg.hops));
        reverse_.reserve(static_cast<std::size_t>(cfg.hops));
        for (int j = 0; j < cfg.hops; ++j) {
            lc.seed = derive_seed(master_seed, 100 + static_cast<std::uint64_t>(j));
            forward_.push_back(std::make_unique<sim::Link<Frame>>(
                ev_, lc, [this, j](Frame&& f) { forward_delivery(j, std::move(f)); }));
            lc.seed = derive_seed(master_seed, 200 + static_cast<std::uint64_t>(j));
            reverse_.push_back(std::make_unique<sim::Link<Frame>>(
                ev_, lc, [this, j](Frame&& f) { reverse_delivery(j, std::move(f)); }));
        }
    }

    void attach(Flow* flow, int id) {
        if (flows_.size() <= static_cast<std::size_t>(id)) flows_.resize(static_cast<std::size_t>(id) + 1);
        flows_[static_cast<std::size_t>(id)] = flow;
    }

    void send_forward(Frame&& f) {
        std::int64_t bits = f.size_bits;
        forward_[0]->transmit(std::move(f), bits);
    }

    void send_reverse(Frame&& f) {
        std::int64_t bits = f.size_bits;
        reverse_[static_cast<std::size_t>(cfg_.hops) - 1]->transmit(std::move(f), bits);
    }

    const sim::LinkStats& forward_stats(int j) const { return forward_[static_cast<std::size_t>(j)]->stats(); }
    const sim::LinkStats& reverse_stats(int j) const { return reverse_[static_cast<std::size_t>(j)]->stats(); }
    std::size_t forward_backlog(int j) const {
        return forward_[static_cast<std::size_t>(j)]->queued() +
               static_cast<std::size_t>(forward_[static_cast<std::size_t>(j)]->propagating());
    }

  private:
    void forward_delivery(int j, Frame&& f) {
        if (j + 1 == cfg_.hops) {
            flows_[static_cast<std::size_t>(f.flow)]->sink_receive(std::move(f));
        } else {
            std::int64_t bits = f.size_bits;
            forward_[static_cast<std::size_t>(j) + 1]->transmit(std::move(f), bits);
        }
    }

    void reverse_delivery(int j, Frame&& f) {
        if (j == 0) {
            flows_[static_cast<std::size_t>(f.flow)]->source_receive(std::move(f));
        } else {
            std::int64_t bits = f.size_bits;
            reverse_[static_cast<std::size_t>(j) - 1]->transmit(std::move(f), bits);
        }
    }

    sim::EventQueue& ev_;
    NetConfig cfg_;
    std::vector<std::unique_ptr<sim::Link<Frame>>> forward_;
    std::vector<std::unique_ptr<sim::Link<Frame>>> reverse_;
    std::vector<Flow*> flows_;
};

struct ScenarioConfig {
    NetConfig net;
    std::vector<FlowConfig> flows;
    double horizon_s = 600.0;
    double sample_interval_s = 2.5;
    std::uint64_t master_seed = 1;
};

struct FlowTotals {
    std::uint64_t delivered_packets = 0;
    std::uint64_t dup_acks = 0;
    std::uint64_t timeouts = 0;
    std::uint64_t payload_errors = 0;
    std::uint64_t rejected_segments = 0;  // span guard or malformed
    std::uint64_t acked = 0;
    std::uint64_t sent = 0;
    std::size_t rx_max_rows = 0;
    std::size_t rx_max_span = 0;
};

struct ScenarioResult {
    MetricsLog log;
    std::vector<FlowTotals> flows;
    std::vector<sim::LinkStats> forward_links;
    std::vector<sim::LinkStats> reverse_links;
};

// Builds the chain, runs every flow to the horizon, samples the throughput
// at fixed intervals. Identical config and seed give identical results.
inline ScenarioResult run_scenario(const ScenarioConfig& sc) {
    sim::EventQueue ev;
    Network network(ev, sc.net, sc.master_seed);

    std::vector<std::unique_ptr<Flow>> flows;
    for (const FlowConfig& fc : sc.flows) {
        auto flow = std::make_unique<Flow>(
            ev, sc.net, fc, derive_seed(sc.master_seed, 300 + static_cast<std::uint64_t>(fc.id)),
            [&network](Frame&& f) { network.send_forward(std::move(f)); },
            [&network](Frame&& f) { network.send_reverse(std::move(f)); });
        network.attach(flow.get(), fc.id);
        flows.push_back(std::move(flow));
    }
    for (auto& f : flows) f->start();

    ScenarioResult res;
    std::vector<std::uint64_t> last_delivered(flows.size(), 0);
    double t = sc.sample_interval_s;
    while (t <= sc.horizon_s + 1e-9) {
        ev.run_until(t);
        for (std::size_t i = 0; i < flows.size(); ++i) {
            MetricsRow row;
            row.time_s = t;
            row.flow_id = sc.flows[i].id;
            std::uint64_t d = flows[i]->delivered_packets();
            row.throughput_mbps = static_cast<double>(d - last_delivered[i]) *
                                  static_cast<double>(sc.net.packet_bytes) * 8.0 /
                                  sc.sample_interval_s / 1e6;
            last_delivered[i] = d;
            row.cwnd = flows[i]->cwnd();
            row.rtt_s = flows[i]->last_rtt();
            row.dup_acks = flows[i]->dup_acks();
            res.log.rows.push_back(row);
        }
        t += sc.sample_interval_s;
    }

    for (std::size_t i = 0; i < flows.size(); ++i) {
        FlowTotals ft;
        ft.delivered_packets = flows[i]->delivered_packets();
        ft.dup_acks = flows[i]->dup_acks();
        ft.timeouts = flows[i]->timeouts();
        ft.payload_errors = flows[i]->payload_errors();
        ft.rejected_segments = flows[i]->shim_rejected();
        ft.acked = flows[i]->acked();
        ft.sent = flows[i]->sent();
        ft.rx_max_rows = flows[i]->rx_max_rows();
        ft.rx_max_span = flows[i]->rx_max_span();
        res.flows.push_back(ft);
    }
    for (int j = 0; j < sc.net.hops; ++j) {
        res.forward_links.push_back(network.forward_stats(j));
        res.reverse_links.push_back(network.reverse_stats(j));
    }
    return res;
}

}  // namespace nctcp::net
