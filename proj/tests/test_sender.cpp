#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nctcp/sender.hpp"

using namespace nctcp;

namespace {

CodedSender<Gf256>::Options opts(double r, std::size_t bytes = 4) {
    CodedSender<Gf256>::Options o;
    o.redundancy = r;
    o.payload_bytes = bytes;
    o.seed = 99;
    return o;
}

std::vector<std::uint8_t> payload(std::uint8_t fill, std::size_t bytes = 4) {
    return std::vector<std::uint8_t>(bytes, fill);
}

}  // namespace

TEST_CASE("one packet at R=1 emits exactly one segment", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    auto action = tx.on_tcp_packet(1, payload(0x01), false, 0.0);
    CHECK_FALSE(action.passthrough);
    REQUIRE(action.segments.size() == 1);
    CHECK(action.segments[0].tx_serial_num == 1);
    CHECK(action.segments[0].window_base == 1);
    CHECK(action.segments[0].coeffs.size() == 1);
}

TEST_CASE("fractional redundancy credits carry across packets", "[sender]") {
    // R = 1.25: emission counts 1,1,1,2 with the accumulator at
    // .25, .5, .75 and finally 0
    CodedSender<Gf256> tx(opts(1.25));
    std::vector<std::size_t> counts;
    for (PacketIndex i = 1; i <= 4; ++i)
        counts.push_back(tx.on_tcp_packet(i, payload(static_cast<std::uint8_t>(i)), false, 0.1 * i)
                             .segments.size());
    CHECK(counts == std::vector<std::size_t>{1, 1, 1, 2});
    CHECK(tx.accumulator() == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("long-run emission totals stay within one of n*R", "[sender]") {
    for (double r : {1.0, 1.1, 1.25, 1.4142, 1.5}) {
        CodedSender<Gf256> tx(opts(r));
        std::size_t total = 0;
        const int n = 500;
        for (PacketIndex i = 1; i <= static_cast<PacketIndex>(n); ++i) {
            total += tx.on_tcp_packet(i, payload(1), false, 0.0).segments.size();
            CHECK(tx.accumulator() >= 0.0);
            CHECK(tx.accumulator() < 1.0);
        }
        CHECK(total >= static_cast<std::size_t>(std::floor(n * r)));
        CHECK(total <= static_cast<std::size_t>(std::ceil(n * r)));
    }
}

TEST_CASE("segments combine the whole coding window", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    for (PacketIndex i = 1; i <= 3; ++i)
        tx.on_tcp_packet(i, payload(static_cast<std::uint8_t>(i)), false, 0.0);
    auto action = tx.on_tcp_packet(4, payload(4), false, 0.0);
    REQUIRE(action.segments.size() == 1);
    // four unacked packets: the combination spans all of them
    CHECK(action.segments[0].window_base == 1);
    CHECK(action.segments[0].coeffs.size() == 4);

    // the combined payload matches the coefficients
    std::vector<std::uint8_t> expect(4, 0);
    for (std::size_t i = 0; i < 4; ++i)
        Gf256::axpy_bytes(std::span<std::uint8_t>(expect), action.segments[0].coeffs[i],
                          std::span<const std::uint8_t>(payload(static_cast<std::uint8_t>(i + 1))));
    CHECK(action.segments[0].payload == expect);
}

TEST_CASE("control packets pass through untouched", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    auto action = tx.on_tcp_packet(1, {}, true, 0.0);
    CHECK(action.passthrough);
    CHECK(action.segments.empty());
    CHECK(tx.window_size() == 0);
    CHECK(tx.tx_serial_num() == 0);
}

TEST_CASE("retransmitted packets do not re-enter the window but earn segments",
          "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    tx.on_tcp_packet(1, payload(1), false, 0.0);
    tx.on_tcp_packet(2, payload(2), false, 0.0);
    REQUIRE(tx.window_size() == 2);
    auto again = tx.on_tcp_packet(1, {}, false, 0.5);  // timeout path
    CHECK(tx.window_size() == 2);
    CHECK(again.segments.size() == 1);
    CHECK(again.segments[0].coeffs.size() == 2);
}

TEST_CASE("ack matching follows the serial after the previous ack's trigger",
          "[sender]") {
    // Four transmissions at distinct times; the second and third are lost in
    // transit. The ack triggered by the fourth arrival carries
    // prev_serial_num = 1 and must be matched to transmission 2.
    CodedSender<Gf256> tx(opts(1.0));
    for (PacketIndex i = 1; i <= 4; ++i)
        tx.on_tcp_packet(i, payload(static_cast<std::uint8_t>(i)), false, 1.0 * i);

    SECTION("the very first ack matches serial 1") {
        TransportAck a = tx.on_coded_ack(CodedAck{2, 0}, 9.0).ack;
        CHECK(a.ack_seq == 2);
        CHECK(a.rtt_echo_time == 1.0);
        CHECK(tx.anomalies() == 0);
    }
    SECTION("after losses the echo is the oldest attempt at the lost degree of freedom") {
        tx.on_coded_ack(CodedAck{2, 0}, 9.0);
        TransportAck a = tx.on_coded_ack(CodedAck{3, 1}, 9.5).ack;
        CHECK(a.rtt_echo_time == 2.0);  // transmission 2's timestamp, exactly
        CHECK(tx.anomalies() == 0);
    }
    SECTION("echo times are non-decreasing across successive acks") {
        double last = 0.0;
        for (std::uint32_t prev = 0; prev < 4; ++prev) {
            TransportAck a = tx.on_coded_ack(CodedAck{2, prev}, 9.0).ack;
            CHECK(a.rtt_echo_time >= last);
            last = a.rtt_echo_time;
        }
    }
}

TEST_CASE("cumulative acks shrink the window from the left", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    for (PacketIndex i = 1; i <= 4; ++i)
        tx.on_tcp_packet(i, payload(static_cast<std::uint8_t>(i)), false, 0.0);
    REQUIRE(tx.window_size() == 4);

    tx.on_coded_ack(CodedAck{3, 0}, 9.0);  // packets 1 and 2 leave
    CHECK(tx.window_base() == 3);
    CHECK(tx.window_size() == 2);

    auto action = tx.on_tcp_packet(5, payload(5), false, 0.0);
    CHECK(action.segments[0].window_base == 3);
    CHECK(action.segments[0].coeffs.size() == 3);
}

TEST_CASE("prev serial beyond the last transmission clamps to the latest",
          "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    tx.on_tcp_packet(1, payload(1), false, 7.5);
    TransportAck a = tx.on_coded_ack(CodedAck{2, 42}, 9.0).ack;  // nothing like serial 43 exists
    CHECK(a.rtt_echo_time == 7.5);
    CHECK(tx.anomalies() == 1);
}

TEST_CASE("transport contract violations are rejected", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    tx.on_tcp_packet(1, payload(1), false, 0.0);
    tx.on_coded_ack(CodedAck{2, 0}, 9.0);
    CHECK_THROWS_AS(tx.on_tcp_packet(1, payload(1), false, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(tx.on_tcp_packet(9, payload(9), false, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(tx.on_tcp_packet(2, payload(2, 3), false, 0.0), std::invalid_argument);
}

TEST_CASE("coefficients are uniform over the field, zero included", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0, 0));
    tx.on_tcp_packet(1, {}, false, 0.0);
    tx.on_tcp_packet(2, {}, false, 0.0);
    std::array<int, 256> hist{};
    int draws = 0;
    for (int i = 0; i < 20000; ++i) {
        auto action = tx.on_tcp_packet(2, {}, false, 0.0);  // re-offer: window stays at 2
        for (auto& seg : action.segments)
            for (auto c : seg.coeffs) {
                ++hist[c];
                ++draws;
            }
    }
    REQUIRE(draws >= 40000);
    for (int v = 0; v < 256; ++v) CHECK(hist[v] > draws / 256 / 4);  // all values occur
}

TEST_CASE("a duplicate ack triggers one replacement combination", "[sender]") {
    CodedSender<Gf256> tx(opts(1.0));
    for (PacketIndex i = 1; i <= 4; ++i)
        tx.on_tcp_packet(i, payload(static_cast<std::uint8_t>(i)), false, 1.0 * i);

    auto first = tx.on_coded_ack(CodedAck{3, 0}, 5.0);
    CHECK(first.repair.empty());  // advancing ack: nothing wasted

    auto dup = tx.on_coded_ack(CodedAck{3, 1}, 6.0);
    REQUIRE(dup.repair.size() == 1);
    CHECK(dup.repair[0].window_base == 3);
    CHECK(dup.repair[0].coeffs.size() == 2);
    CHECK(dup.repair[0].tx_serial_num == 5);  // serials keep counting

    // acking past everything leaves no window to repair from
    auto done = tx.on_coded_ack(CodedAck{5, 2}, 7.0);
    CHECK(done.repair.empty());
    auto dup_after_done = tx.on_coded_ack(CodedAck{5, 3}, 8.0);
    CHECK(dup_after_done.repair.empty());
}
