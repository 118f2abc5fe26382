#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "nctcp/wire.hpp"

namespace nctcp {

// Sink-side coding layer. Absorbs coded segments into a knowledge space,
// acks the degree of freedom each arrival conveys (the oldest unseen packet
// moves forward), and delivers decoded packets upward in index order.
template <class Field>
class CodedReceiver {
  public:
    struct Options {
        std::size_t payload_bytes = 1000;
        std::size_t max_span = 200;  // widest coding window a segment may span
    };

    struct RxResult {
        std::optional<CodedAck> ack;  // absent only when the segment was discarded
        std::vector<typename KnowledgeSpace<Field>::DecodedPacket> delivered;
    };

    explicit CodedReceiver(const Options& opt)
        : opt_(opt), ks_(opt.payload_bytes) {}

    PacketIndex delivered_up_to() const { return delivered_up_to_; }
    std::uint32_t prev_serial_num() const { return prev_serial_num_; }
    const KnowledgeSpace<Field>& knowledge() const { return ks_; }
    std::uint64_t segments_processed() const { return processed_; }
    std::uint64_t segments_rejected() const { return rejected_; }
    std::uint64_t non_innovative() const { return non_innovative_; }
    std::size_t max_rows() const { return max_rows_; }
    std::size_t max_span() const { return max_span_; }

    RxResult on_coded_segment(const CodedSegment& seg) {
        RxResult res;
        if (seg.payload.size() != opt_.payload_bytes || seg.coeffs.empty() ||
            !within_span(seg)) {
            ++rejected_;
            return res;  // treated as an erasure: no ack
        }

        typename KnowledgeSpace<Field>::SeenReport report;
        try {
            report = ks_.insert(std::span<const std::uint8_t>(seg.coeffs), seg.window_base,
                                std::span<const std::uint8_t>(seg.payload));
        } catch (const std::invalid_argument&) {
            ++rejected_;  // references columns this sink can no longer resolve
            return res;
        }

        ++processed_;
        if (!report.innovative) ++non_innovative_;
        max_rows_ = std::max(max_rows_, ks_.dimension());
        max_span_ = std::max(max_span_, ks_.span());
        for (auto& d : report.decoded) pending_.emplace(d.index, std::move(d.payload));

        // hand up the contiguous decoded prefix, in order, exactly once
        for (auto it = pending_.begin();
             it != pending_.end() && it->first == delivered_up_to_ + 1;
             it = pending_.erase(it)) {
            res.delivered.push_back({it->first, std::move(it->second)});
            ++delivered_up_to_;
        }

        // Witness rows stay until the packet is both delivered and outside
        // every window the source may still combine over.
        if (seg.window_base > max_seg_base_) max_seg_base_ = seg.window_base;
        ks_.drop_before(std::min<PacketIndex>(max_seg_base_, delivered_up_to_ + 1));

        res.ack = CodedAck{ks_.oldest_unseen(), prev_serial_num_};
        prev_serial_num_ = seg.tx_serial_num;
        return res;
    }

    // Acks originating at the sink transport: connection-management control
    // packets pass through, ordinary data acks are swallowed (this layer is
    // the only source of data acks).
    bool on_tcp_sink_ack(bool is_control) const { return is_control; }

  private:
    bool within_span(const CodedSegment& seg) const {
        return seg.coeffs.size() <= opt_.max_span && seg.window_base >= ks_.window_base();
    }

    Options opt_;
    KnowledgeSpace<Field> ks_;
    std::uint32_t prev_serial_num_ = 0;
    PacketIndex delivered_up_to_ = 0;
    PacketIndex max_seg_base_ = 1;
    std::map<PacketIndex, std::vector<std::uint8_t>> pending_;  // decoded, waiting for prefix
    std::uint64_t processed_ = 0;
    std::uint64_t rejected_ = 0;
    std::size_t max_rows_ = 0;
    std::size_t max_span_ = 0;
    std::uint64_t non_innovative_ = 0;
};

}  // namespace nctcp
