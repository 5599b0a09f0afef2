#include "doctest.h"

#include <cmath>
#include <set>

#include "scle/rng.hpp"

using namespace scle;

TEST_SUITE("rng") {

TEST_CASE("Philox4x32-10 known-answer vectors") {
    using B = Philox4x32::Block;
    // counter (0,0,0,0), key (0,0)
    CHECK(Philox4x32(0, 0).block(0) == B{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    // all bits set
    CHECK(Philox4x32(~0ULL, ~0ULL).block(~0ULL) ==
          B{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    // digits of pi: counter (243f6a88, 85a308d3, 13198a2e, 03707344), key (a4093822, 299f31d0)
    CHECK(Philox4x32(0x299f31d0a4093822ULL, 0x0370734413198a2eULL).block(0x85a308d3243f6a88ULL) ==
          B{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("interleaved blocks equal single blocks") {
    const Philox4x32 g(12345, 678);
    for (std::uint64_t base : {0ULL, 5ULL, 0xfffffffeULL, ~0ULL - 2}) {
        std::uint32_t out[16];
        g.blocks4(base, out);
        for (int j = 0; j < 4; ++j) {
            const auto b = g.block(base + j);
            for (int w = 0; w < 4; ++w) CHECK(out[4 * j + w] == b[w]);
        }
    }
}

TEST_CASE("engine words are consecutive block halves") {
    const Philox4x32 g(9, 3);
    PhiloxEngine e(9, 3);
    for (std::uint64_t blk = 0; blk < 12; ++blk) {
        const auto b = g.block(blk);
        CHECK(e() == (std::uint64_t{b[0]} | (std::uint64_t{b[1]} << 32)));
        CHECK(e() == (std::uint64_t{b[2]} | (std::uint64_t{b[3]} << 32)));
    }
}

TEST_CASE("streams are reproducible and distinct") {
    NormalStream a(1, 0), b(1, 0), c(1, 1), d(2, 0);
    std::set<double> firsts;
    for (int i = 0; i < 100; ++i) {
        const double x = a.next();
        CHECK(x == b.next());
        if (i == 0) {
            firsts.insert(x);
            firsts.insert(c.next());
            firsts.insert(d.next());
        }
    }
    CHECK(firsts.size() == 3);
}

TEST_CASE("normal variates have unit moments") {
    NormalStream s(2024, 7);
    const int n = 1'000'000;
    double m1 = 0, m2 = 0, m3 = 0, m4 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.next();
        m1 += x;
        m2 += x * x;
        m3 += x * x * x;
        m4 += x * x * x * x;
    }
    m1 /= n;
    m2 /= n;
    m3 /= n;
    m4 /= n;
    // 5 sigma bands: var(x)=1, var(x^2)=2, var(x^3)=15, var(x^4)=96
    CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
    CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(std::abs(m3) < 5.0 * std::sqrt(15.0 / n));
    CHECK(std::abs(m4 - 3.0) < 5.0 * std::sqrt(96.0 / n));
}

TEST_CASE("uniforms lie in (0, 1]") {
    NormalStream s(5, 5);
    double sum = 0.0;
    const int n = 200'000;
    for (int i = 0; i < n; ++i) {
        const double u = s.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u <= 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

}
