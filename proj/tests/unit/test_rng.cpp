#include <doctest.h>

#include <cmath>
#include <set>

#include "mfgabs/rng.hpp"

using namespace mfgabs;

TEST_CASE("philox known-answer vectors")
{
    using C = Philox4x32::Counter;
    using K = Philox4x32::Key;
    CHECK(Philox4x32::generate(C{0, 0, 0, 0}, K{0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::generate(C{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, K{0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::generate(C{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, K{0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream draws are pure functions of their keys")
{
    const StreamRng a(42), b(42), c(43);
    CHECK(a.uniform(3, 7, StreamTag::increment) == b.uniform(3, 7, StreamTag::increment));
    CHECK(a.normal(3, 7, StreamTag::bridge) == b.normal(3, 7, StreamTag::bridge));
    CHECK(a.uniform(3, 7, StreamTag::increment) != c.uniform(3, 7, StreamTag::increment));
    CHECK(a.uniform(3, 7, StreamTag::increment) != a.uniform(3, 7, StreamTag::bridge));
    CHECK(a.uniform(3, 7, StreamTag::increment) != a.uniform(4, 7, StreamTag::increment));
}

TEST_CASE("uniform and normal moments")
{
    const StreamRng rng(2024);
    constexpr int n = 200000;
    double su = 0, sn = 0, sn2 = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform(static_cast<std::uint64_t>(i), 0, StreamTag::oracle);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal(static_cast<std::uint64_t>(i), 1, StreamTag::oracle);
        sn += z;
        sn2 += z * z;
    }
    CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sn / n) < 5 / std::sqrt(double(n)));
    CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
}

TEST_CASE("mix_seed separates indices")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i)
        seen.insert(mix_seed(7, i));
    CHECK(seen.size() == 1000);
    CHECK(mix_seed(7, 3) == mix_seed(7, 3));
}
