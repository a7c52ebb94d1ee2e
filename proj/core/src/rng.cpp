#include "mfgabs/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfgabs {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept
{
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMulA, ctr[0], hi0, lo0);
        mulhilo(kMulB, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

StreamRng::StreamRng(std::uint64_t seed) noexcept
    : seed_(seed), key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
{
}

Philox4x32::Counter StreamRng::counter(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept
{
    const auto high = static_cast<std::uint32_t>(stream >> 32) ^ (static_cast<std::uint32_t>(step >> 32) << 16);
    return {static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(step),
            static_cast<std::uint32_t>(tag), high};
}

double StreamRng::uniform(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept
{
    const auto out = Philox4x32::generate(counter(stream, step, tag), key_);
    return to_unit(out[0], out[1]);
}

double StreamRng::normal(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept
{
    const auto out = Philox4x32::generate(counter(stream, step, tag), key_);
    const double u1 = 1.0 - to_unit(out[0], out[1]);  // (0, 1]
    const double u2 = to_unit(out[2], out[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept
{
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace mfgabs
