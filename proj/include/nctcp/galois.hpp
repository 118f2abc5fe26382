#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace nctcp {

// Arithmetic over GF(2^Bits) with a fixed reduction polynomial.
// Multiplication and inversion go through log/antilog tables indexed by
// powers of a primitive element, built once at compile time. Addition is
// XOR (characteristic 2), so every element is its own additive inverse.
template <unsigned Bits, unsigned Poly, std::uint8_t Generator>
struct GaloisField {
    static_assert(Bits >= 1 && Bits <= 8, "one-byte elements only");

    using Elem = std::uint8_t;
    static constexpr unsigned kOrder = 1u << Bits;  // field size q
    static constexpr Elem kMax = static_cast<Elem>(kOrder - 1);

    static constexpr Elem add(Elem a, Elem b) { return a ^ b; }
    static constexpr Elem sub(Elem a, Elem b) { return a ^ b; }

    static constexpr Elem mul(Elem a, Elem b) {
        if (a == 0 || b == 0) return 0;
        return kTables.exp[kTables.log[a] + kTables.log[b]];
    }

    static constexpr Elem inv(Elem a) {
        if (a == 0) throw std::domain_error("GaloisField::inv: zero has no inverse");
        return kTables.exp[kOrder - 1 - kTables.log[a]];
    }

    static constexpr Elem div(Elem a, Elem b) { return mul(a, inv(b)); }

    // dst[i] += scale * src[i]
    static void axpy(std::span<Elem> dst, Elem scale, std::span<const Elem> src) {
        if (dst.size() != src.size())
            throw std::invalid_argument("GaloisField::axpy: length mismatch");
        if (scale == 0) return;
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] ^= mul(scale, src[i]);
    }

    // Same row operation applied to payload bytes. For the byte-sized field
    // this is element-wise; for sub-byte fields each byte is scaled one
    // packed element at a time (two nibbles for GF(16)).
    static void axpy_bytes(std::span<std::uint8_t> dst, Elem scale,
                           std::span<const std::uint8_t> src) {
        if (dst.size() != src.size())
            throw std::invalid_argument("GaloisField::axpy_bytes: length mismatch");
        if (scale == 0) return;
        for (std::size_t i = 0; i < dst.size(); ++i)
            dst[i] ^= scale_byte(scale, src[i]);
    }

    static constexpr std::uint8_t scale_byte(Elem scale, std::uint8_t v) {
        if constexpr (Bits == 8) {
            return mul(scale, v);
        } else if constexpr (Bits == 4) {
            return static_cast<std::uint8_t>(mul(scale, v >> 4) << 4 |
                                             mul(scale, v & 0x0F));
        } else if constexpr (Bits == 1) {
            return scale ? v : std::uint8_t{0};  // eight packed bits scale together
        } else {
            static_assert(Bits == 8 || Bits == 4 || Bits == 1, "packed payload scaling");
        }
    }

  private:
    struct Tables {
        std::array<Elem, 2 * kOrder> exp{};
        std::array<std::uint8_t, kOrder> log{};
        bool primitive = false;
    };

    static constexpr unsigned shift_mul(unsigned a, unsigned b) {
        unsigned p = 0;
        while (b != 0) {
            if (b & 1u) p ^= a;
            a <<= 1;
            if (a & kOrder) a ^= Poly;
            b >>= 1;
        }
        return p;
    }

    static constexpr Tables make_tables() {
        Tables t{};
        unsigned x = 1;
        for (unsigned i = 0; i < kOrder - 1; ++i) {
            t.exp[i] = static_cast<Elem>(x);
            t.log[x] = static_cast<std::uint8_t>(i);
            x = shift_mul(x, Generator);
        }
        // doubled antilog table removes the mod (q-1) from mul()
        for (unsigned i = kOrder - 1; i < 2 * kOrder; ++i)
            t.exp[i] = t.exp[i - (kOrder - 1)];
        t.primitive = (x == 1);  // generator cycles through all q-1 nonzero elements
        return t;
    }

    static constexpr Tables kTables = make_tables();
    static_assert(make_tables().primitive, "Generator must be primitive for Poly");
};

// Default field: one-byte coefficients, reduction polynomial
// x^8 + x^4 + x^3 + x + 1. Element 2 is not primitive for this polynomial,
// 3 is.
using Gf256 = GaloisField<8, 0x11B, 3>;

// Small field for exhaustive tests: x^4 + x + 1.
using Gf16 = GaloisField<4, 0x13, 2>;

// Binary field, coefficients 0/1; combinations degenerate to subset sums.
using Gf2 = GaloisField<1, 0x3, 1>;

}  // namespace nctcp
