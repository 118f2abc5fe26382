#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nctcp/knowledge_space.hpp"

namespace nctcp {

// The two wire messages of the coding layer. Layouts are big-endian and
// normative; the codec tests pin them byte for byte.
//
//   segment: magic 0x4E01 (2) | tx_serial_num u32 | window_base u32 |
//            window_len u16 | window_len coefficient bytes | payload
//   ack:     magic 0x4EAC (2) | ack_seq u32 | prev_serial_num u32

inline constexpr std::uint16_t kSegmentMagic = 0x4E01;
inline constexpr std::uint16_t kAckMagic = 0x4EAC;

struct CodedSegment {
    std::uint32_t tx_serial_num = 0;
    PacketIndex window_base = 0;
    std::vector<std::uint8_t> coeffs;  // one byte per packet spanned
    std::vector<std::uint8_t> payload;
};

struct CodedAck {
    PacketIndex ack_seq = 0;            // oldest unseen at the sink
    std::uint32_t prev_serial_num = 0;  // serial that triggered the previous ack
};

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline std::uint16_t get_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] << 8 | p[1]);
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) << 24 | static_cast<std::uint32_t>(p[1]) << 16 |
           static_cast<std::uint32_t>(p[2]) << 8 | static_cast<std::uint32_t>(p[3]);
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_segment(const CodedSegment& seg) {
    std::vector<std::uint8_t> out;
    out.reserve(14 + seg.coeffs.size() + seg.payload.size());
    detail::put_u16(out, kSegmentMagic);
    detail::put_u32(out, seg.tx_serial_num);
    detail::put_u32(out, seg.window_base);
    detail::put_u16(out, static_cast<std::uint16_t>(seg.coeffs.size()));
    out.insert(out.end(), seg.coeffs.begin(), seg.coeffs.end());
    out.insert(out.end(), seg.payload.begin(), seg.payload.end());
    return out;
}

// Returns nullopt on any framing problem; the caller treats that as an
// erasure. `payload_bytes` is the configured packet size and must match
// exactly.
inline std::optional<CodedSegment> decode_segment(const std::vector<std::uint8_t>& in,
                                                  std::size_t payload_bytes) {
    if (in.size() < 12 || detail::get_u16(in.data()) != kSegmentMagic) return std::nullopt;
    CodedSegment seg;
    seg.tx_serial_num = detail::get_u32(in.data() + 2);
    seg.window_base = detail::get_u32(in.data() + 6);
    std::size_t len = detail::get_u16(in.data() + 10);
    if (len == 0 || in.size() != 12 + len + payload_bytes) return std::nullopt;
    seg.coeffs.assign(in.begin() + 12, in.begin() + 12 + static_cast<std::ptrdiff_t>(len));
    seg.payload.assign(in.begin() + 12 + static_cast<std::ptrdiff_t>(len), in.end());
    return seg;
}

inline std::vector<std::uint8_t> encode_ack(const CodedAck& ack) {
    std::vector<std::uint8_t> out;
    out.reserve(10);
    detail::put_u16(out, kAckMagic);
    detail::put_u32(out, ack.ack_seq);
    detail::put_u32(out, ack.prev_serial_num);
    return out;
}

inline std::optional<CodedAck> decode_ack(const std::vector<std::uint8_t>& in) {
    if (in.size() != 10 || detail::get_u16(in.data()) != kAckMagic) return std::nullopt;
    CodedAck ack;
    ack.ack_seq = detail::get_u32(in.data() + 2);
    ack.prev_serial_num = detail::get_u32(in.data() + 6);
    return ack;
}

}  // namespace nctcp
