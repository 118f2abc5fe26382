#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "nctcp/galois.hpp"

namespace nctcp {

// Packet-granularity sequence number of an original packet. Indices start
// at 1 and increase in generation order at the source.
using PacketIndex = std::uint32_t;

// Everything a node knows about the original packet stream, kept as a basis
// matrix in row-reduced echelon form over a sliding column window, plus one
// payload row per basis row that tracks the identical row operations.
//
// Terminology used throughout:
//   seen      - index k is a pivot column: the node can form p_k + (a
//               combination of strictly newer, unseen packets)
//   witness   - the pivot row for a seen packet; its non-pivot support
//               involves only unseen packets
//   decoded   - a witness reduced to a single nonzero entry; the payload row
//               then equals the original packet
//   innovative- an insert that raised the basis rank
//
// Reduced echelon form makes every row exactly "pivot plus a combination of
// unseen packets", so rows are stored that way: an implicit unit pivot and a
// short dense tail over the row's unseen support. The tail hugs the seeing
// frontier no matter how far the pivot trails it, which keeps both memory
// and elimination work proportional to the coding window, not to the
// decoding backlog.
template <class Field>
class KnowledgeSpace {
  public:
    using Elem = typename Field::Elem;
    using CoeffVector = std::vector<Elem>;

    struct DecodedPacket {
        PacketIndex index = 0;
        std::vector<std::uint8_t> payload;
    };

    struct SeenReport {
        std::optional<PacketIndex> newly_seen;
        bool innovative = false;
        std::vector<DecodedPacket> decoded;  // newly reduced to singletons
    };

    explicit KnowledgeSpace(std::size_t payload_bytes = 1000, PacketIndex window_base = 1)
        : payload_bytes_(payload_bytes), window_base_(window_base), right_edge_(window_base) {}

    PacketIndex window_base() const { return window_base_; }
    std::size_t payload_bytes() const { return payload_bytes_; }
    std::size_t dimension() const { return rows_.size(); }
    // columns currently represented: [window_base, window_base + span)
    std::size_t span() const { return right_edge_ - window_base_; }

    // Inserts one received linear combination. `coeffs[i]` multiplies packet
    // `base + i`. Reports which packet (if any) became newly seen, whether
    // the row was innovative, and the packets that became fully decoded.
    // Dependent rows are absorbed and reported with innovative = false.
    SeenReport insert(std::span<const Elem> coeffs, PacketIndex base,
                      std::span<const std::uint8_t> payload) {
        if (payload.size() != payload_bytes_)
            throw std::invalid_argument("KnowledgeSpace::insert: bad payload length");

        SeenReport report;
        Work v;
        if (!load(coeffs, base, v)) return report;  // all-zero combination
        std::vector<std::uint8_t> p(payload.begin(), payload.end());

        // forward elimination: clear every pivot column present in v,
        // starting from its leading entry
        PacketIndex pos = v.first_nonzero();
        while (pos != 0) {
            const Row* r = find_row(pos);
            if (!r) break;
            eliminate(v, p, *r, pos);
            pos = v.first_nonzero();
        }
        if (pos == 0) return report;  // dependent: already in the span

        // normalize so the pivot coefficient is 1
        Elem scale = Field::inv(v.at(pos));
        if (scale != 1) {
            for (auto& e : v.data) e = Field::mul(e, scale);
            for (auto& b : p) b = Field::scale_byte(scale, b);
        }

        // the new row itself must be zero on every later pivot column
        for (std::size_t i = row_index_above(pos); i < rows_.size(); ++i) {
            PacketIndex col = rows_[i].pivot;
            if (col >= v.end()) break;
            if (v.at(col) != 0) eliminate(v, p, rows_[i], col);
        }

        Row row;
        row.pivot = pos;
        row.tail_lo = pos + 1;
        row.tail.assign(v.data.begin() + static_cast<std::ptrdiff_t>(pos + 1 - v.lo), v.data.end());
        trim(row);
        row.payload = std::move(p);
        right_edge_ = std::max(right_edge_, v.end());

        // remove the new pivot column from every older row that spans it
        std::vector<std::size_t> touched;
        for (std::size_t i = 0; i < rows_.size() && rows_[i].pivot < pos; ++i) {
            Row& r = rows_[i];
            Elem c = r.tail_at(pos);
            if (c == 0) continue;
            r.set_tail(pos, 0);
            if (!row.tail.empty()) {
                r.grow_to(row.tail_lo, row.tail_lo + static_cast<PacketIndex>(row.tail.size()));
                Field::axpy(r.tail_span(row.tail_lo, row.tail.size()), c,
                            std::span<const Elem>(row.tail));
            }
            Field::axpy_bytes(std::span<std::uint8_t>(r.payload), c,
                              std::span<const std::uint8_t>(row.payload));
            trim(r);
            touched.push_back(i);
        }

        report.innovative = true;
        report.newly_seen = pos;

        std::size_t at = row_index_above(pos);
        rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), std::move(row));
        for (auto& i : touched)
            if (i >= at) ++i;  // defensive; touched rows all precede the new pivot
        touched.push_back(at);

        for (std::size_t i : touched) {
            Row& r = rows_[i];
            if (!r.decoded && r.tail.empty()) {
                r.decoded = true;
                report.decoded.push_back({r.pivot, r.payload});
            }
        }
        std::sort(report.decoded.begin(), report.decoded.end(),
                  [](const DecodedPacket& a, const DecodedPacket& b) { return a.index < b.index; });
        return report;
    }

    // Pivot-column indices, ascending.
    std::vector<PacketIndex> seen_set() const {
        std::vector<PacketIndex> out;
        out.reserve(rows_.size());
        for (const Row& r : rows_) out.push_back(r.pivot);
        return out;
    }

    bool is_seen(PacketIndex k) const { return find_row(k) != nullptr; }

    // Smallest index >= window_base not seen. The seen set may have gaps.
    PacketIndex oldest_unseen() const {
        PacketIndex expect = window_base_;
        for (const Row& r : rows_) {
            if (r.pivot != expect) break;
            ++expect;
        }
        return expect;
    }

    // The unique known combination p_k + q with q over unseen packets only,
    // as a dense vector over [window_base, window_base + span). The view is
    // valid until the next call on this object.
    std::span<const Elem> witness(PacketIndex k) const {
        const Row* r = find_row(k);
        if (!r) throw std::domain_error("KnowledgeSpace::witness: packet not seen");
        scratch_.assign(span(), 0);
        scratch_[k - window_base_] = 1;
        for (std::size_t i = 0; i < r->tail.size(); ++i)
            scratch_[r->tail_lo + i - window_base_] = r->tail[i];
        return {scratch_.data(), scratch_.size()};
    }

    std::span<const std::uint8_t> payload_row(PacketIndex k) const {
        const Row* r = find_row(k);
        if (!r) throw std::domain_error("KnowledgeSpace::payload_row: packet not seen");
        return {r->payload.data(), r->payload.size()};
    }

    // Removes rows with pivot < k and advances the window base to k.
    // Reduced form guarantees no surviving row references the dropped
    // columns.
    void drop_before(PacketIndex k) {
        if (k <= window_base_) return;
        std::size_t keep_from = 0;
        while (keep_from < rows_.size() && rows_[keep_from].pivot < k) ++keep_from;
        rows_.erase(rows_.begin(), rows_.begin() + static_cast<std::ptrdiff_t>(keep_from));
        window_base_ = k;
        right_edge_ = window_base_;
        for (const Row& r : rows_)
            right_edge_ = std::max(right_edge_, std::max<PacketIndex>(
                r.pivot + 1, r.tail_lo + static_cast<PacketIndex>(r.tail.size())));
    }

  private:
    // One basis row: implicit coefficient 1 at `pivot`, then a dense tail
    // over [tail_lo, tail_lo + tail.size()), the row's unseen support.
    struct Row {
        PacketIndex pivot = 0;
        PacketIndex tail_lo = 0;
        CoeffVector tail;
        std::vector<std::uint8_t> payload;
        bool decoded = false;

        Elem tail_at(PacketIndex col) const {
            if (col < tail_lo || col >= tail_lo + tail.size()) return 0;
            return tail[col - tail_lo];
        }
        void set_tail(PacketIndex col, Elem val) {
            if (col < tail_lo || col >= tail_lo + tail.size()) {
                if (val == 0) return;
                grow_to(col, col + 1);
            }
            tail[col - tail_lo] = val;
        }
        void grow_to(PacketIndex lo, PacketIndex hi) {
            if (tail.empty()) {
                tail_lo = lo;
                tail.assign(hi - lo, 0);
                return;
            }
            if (lo < tail_lo) {
                tail.insert(tail.begin(), tail_lo - lo, 0);
                tail_lo = lo;
            }
            PacketIndex end = tail_lo + static_cast<PacketIndex>(tail.size());
            if (hi > end) tail.resize(tail.size() + (hi - end), 0);
        }
        std::span<Elem> tail_span(PacketIndex lo, std::size_t n) {
            return {tail.data() + (lo - tail_lo), n};
        }
    };

    // Incoming combination being reduced: dense over [lo, lo + data.size()).
    struct Work {
        PacketIndex lo = 0;
        CoeffVector data;

        PacketIndex end() const { return lo + static_cast<PacketIndex>(data.size()); }
        Elem at(PacketIndex col) const {
            if (col < lo || col >= end()) return 0;
            return data[col - lo];
        }
        PacketIndex first_nonzero() const {
            for (std::size_t i = 0; i < data.size(); ++i)
                if (data[i] != 0) return lo + static_cast<PacketIndex>(i);
            return 0;
        }
        void grow_to(PacketIndex hi) {
            if (hi > end()) data.resize(hi - lo, 0);
        }
        std::span<Elem> range(PacketIndex from, std::size_t n) {
            return {data.data() + (from - lo), n};
        }
    };

    bool load(std::span<const Elem> coeffs, PacketIndex base, Work& v) const {
        std::size_t lead = 0;
        while (lead < coeffs.size() && coeffs[lead] == 0) ++lead;
        std::size_t tail = coeffs.size();
        while (tail > lead && coeffs[tail - 1] == 0) --tail;
        if (lead == tail) return false;
        if (base + lead < window_base_)
            throw std::invalid_argument(
                "KnowledgeSpace::insert: combination references dropped columns");
        v.lo = base + static_cast<PacketIndex>(lead);
        v.data.assign(coeffs.begin() + static_cast<std::ptrdiff_t>(lead),
                      coeffs.begin() + static_cast<std::ptrdiff_t>(tail));
        return true;
    }

    // v -= v[col] * row, where row = e_col + tail.
    void eliminate(Work& v, std::vector<std::uint8_t>& p, const Row& r, PacketIndex col) {
        Elem c = v.at(col);
        v.data[col - v.lo] = 0;
        if (!r.tail.empty()) {
            v.grow_to(r.tail_lo + static_cast<PacketIndex>(r.tail.size()));
            Field::axpy(v.range(r.tail_lo, r.tail.size()), c, std::span<const Elem>(r.tail));
        }
        Field::axpy_bytes(std::span<std::uint8_t>(p), c, std::span<const std::uint8_t>(r.payload));
    }

    static void trim(Row& r) {
        std::size_t lead = 0;
        while (lead < r.tail.size() && r.tail[lead] == 0) ++lead;
        if (lead) {
            r.tail.erase(r.tail.begin(), r.tail.begin() + static_cast<std::ptrdiff_t>(lead));
            r.tail_lo += static_cast<PacketIndex>(lead);
        }
        while (!r.tail.empty() && r.tail.back() == 0) r.tail.pop_back();
        if (r.tail.empty()) r.tail_lo = r.pivot + 1;
    }

    std::size_t row_index_above(PacketIndex col) const {
        auto it = std::lower_bound(rows_.begin(), rows_.end(), col,
                                   [](const Row& r, PacketIndex c) { return r.pivot < c; });
        return static_cast<std::size_t>(it - rows_.begin());
    }

    const Row* find_row(PacketIndex k) const {
        if (k < window_base_) return nullptr;
        std::size_t i = row_index_above(k);
        if (i == rows_.size() || rows_[i].pivot != k) return nullptr;
        return &rows_[i];
    }

    std::size_t payload_bytes_;
    PacketIndex window_base_;
    PacketIndex right_edge_;  // one past the largest column referenced
    std::vector<Row> rows_;   // ascending pivot
    mutable CoeffVector scratch_;  // witness() staging
};

}  // namespace nctcp
