#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nctcp/galois.hpp"
#include "oracles.hpp"

using nctcp::Gf16;
using nctcp::Gf256;

TEST_CASE("gf256 addition is xor", "[galois]") {
    CHECK(Gf256::add(0x53, 0xCA) == 0x99);
    for (int x = 0; x < 256; ++x) {
        CHECK(Gf256::add(static_cast<std::uint8_t>(x), 0) == x);          // identity
        CHECK(Gf256::add(static_cast<std::uint8_t>(x),
                         static_cast<std::uint8_t>(x)) == 0);             // characteristic 2
    }
}

TEST_CASE("gf256 multiplication matches bitwise reference", "[galois]") {
    CHECK(Gf256::mul(0x53, 0xCA) == oracles::slow_mul(0x53, 0xCA, 0x11B, 8));
    CHECK(Gf256::mul(0x53, 0xCA) == 0x01);
    for (int a = 0; a < 256; ++a) {
        CHECK(Gf256::mul(static_cast<std::uint8_t>(a), 1) == a);
        CHECK(Gf256::mul(static_cast<std::uint8_t>(a), 0) == 0);
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        std::uint8_t a = static_cast<std::uint8_t>(rng());
        std::uint8_t b = static_cast<std::uint8_t>(rng());
        CHECK(Gf256::mul(a, b) == oracles::slow_mul(a, b, 0x11B, 8));
    }
}

TEST_CASE("gf256 inverse", "[galois]") {
    CHECK(Gf256::inv(1) == 1);
    CHECK(Gf256::inv(0x53) == oracles::slow_inv(0x53, 0x11B, 8));
    CHECK(Gf256::inv(0x53) == 0xCA);
    CHECK_THROWS_AS(Gf256::inv(0), std::domain_error);
    for (int a = 1; a < 256; ++a)
        CHECK(Gf256::mul(static_cast<std::uint8_t>(a), Gf256::inv(static_cast<std::uint8_t>(a))) == 1);
}

TEST_CASE("gf16 field laws hold exhaustively", "[galois]") {
    for (unsigned a = 0; a < 16; ++a) {
        for (unsigned b = 0; b < 16; ++b) {
            CHECK(Gf16::mul(static_cast<std::uint8_t>(a), static_cast<std::uint8_t>(b)) ==
                  oracles::slow_mul(a, b, 0x13, 4));
            for (unsigned c = 0; c < 16; ++c) {
                auto A = static_cast<std::uint8_t>(a), B = static_cast<std::uint8_t>(b),
                     C = static_cast<std::uint8_t>(c);
                CHECK(Gf16::add(Gf16::add(A, B), C) == Gf16::add(A, Gf16::add(B, C)));
                CHECK(Gf16::mul(Gf16::mul(A, B), C) == Gf16::mul(A, Gf16::mul(B, C)));
                CHECK(Gf16::mul(A, Gf16::add(B, C)) == Gf16::add(Gf16::mul(A, B), Gf16::mul(A, C)));
            }
        }
        if (a != 0) CHECK(Gf16::mul(static_cast<std::uint8_t>(a), Gf16::inv(static_cast<std::uint8_t>(a))) == 1);
    }
}

TEST_CASE("gf256 field laws on random triples", "[galois]") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 30000; ++i) {
        std::uint8_t a = static_cast<std::uint8_t>(rng());
        std::uint8_t b = static_cast<std::uint8_t>(rng());
        std::uint8_t c = static_cast<std::uint8_t>(rng());
        REQUIRE(Gf256::add(Gf256::add(a, b), c) == Gf256::add(a, Gf256::add(b, c)));
        REQUIRE(Gf256::mul(Gf256::mul(a, b), c) == Gf256::mul(a, Gf256::mul(b, c)));
        REQUIRE(Gf256::mul(a, Gf256::add(b, c)) == Gf256::add(Gf256::mul(a, b), Gf256::mul(a, c)));
        REQUIRE(Gf256::mul(a, b) == Gf256::mul(b, a));
    }
}

TEST_CASE("axpy row operation", "[galois]") {
    SECTION("zero scale leaves the destination alone") {
        std::vector<std::uint8_t> v{1, 2, 3}, w{9, 9, 9};
        Gf256::axpy(std::span<std::uint8_t>(v), 0, std::span<const std::uint8_t>(w));
        CHECK(v == std::vector<std::uint8_t>{1, 2, 3});
    }
    SECTION("adding a vector to itself cancels") {
        std::vector<std::uint8_t> v{1, 2, 3};
        std::vector<std::uint8_t> copy = v;
        Gf256::axpy(std::span<std::uint8_t>(v), 1, std::span<const std::uint8_t>(copy));
        CHECK(v == std::vector<std::uint8_t>{0, 0, 0});
    }
    SECTION("combining two unit-sum rows") {  // z = x - y
        std::vector<std::uint8_t> x{1, 1, 0};
        std::vector<std::uint8_t> y{1, 0, 1};
        Gf256::axpy(std::span<std::uint8_t>(x), 1, std::span<const std::uint8_t>(y));
        CHECK(x == std::vector<std::uint8_t>{0, 1, 1});
    }
    SECTION("length mismatch is a contract violation") {
        std::vector<std::uint8_t> v{1, 2}, w{1, 2, 3};
        CHECK_THROWS_AS(Gf256::axpy(std::span<std::uint8_t>(v), 1, std::span<const std::uint8_t>(w)),
                        std::invalid_argument);
    }
}

TEST_CASE("gf16 packed payload scaling acts per nibble", "[galois]") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        std::uint8_t s = static_cast<std::uint8_t>(rng() & 0x0F);
        std::uint8_t v = static_cast<std::uint8_t>(rng());
        std::uint8_t expect = static_cast<std::uint8_t>(
            oracles::slow_mul(s, v >> 4, 0x13, 4) << 4 | oracles::slow_mul(s, v & 0x0F, 0x13, 4));
        CHECK(Gf16::scale_byte(s, v) == expect);
    }
}
