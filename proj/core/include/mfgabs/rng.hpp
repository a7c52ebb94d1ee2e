#pragma once

#include <array>
#include <cstdint>

namespace mfgabs {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// Stateless: every output block is a pure function of (counter, key), so
/// draws keyed by (seed, particle, step) are reproducible under any
/// parallel schedule.
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter ctr, Key key) noexcept;
};

/// Independent substreams. The tag occupies the third counter word.
enum class StreamTag : std::uint32_t {
    increment = 0,  // Brownian increments
    bridge = 1,     // Bernoulli draws for bridge absorption
    initial = 2,    // initial-law sampling
    probe = 3,      // assumption probes
    oracle = 4,     // test-side and auxiliary sampling
};

/// Keyed access to the counter-based stream of one experiment seed.
class StreamRng {
public:
    explicit StreamRng(std::uint64_t seed) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept;

    /// Standard normal via Box–Muller on one Philox block.
    double normal(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept;

private:
    Philox4x32::Counter counter(std::uint64_t stream, std::uint64_t step, StreamTag tag) const noexcept;

    std::uint64_t seed_;
    Philox4x32::Key key_;
};

/// SplitMix64 finalizer; derives replication seeds from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

}  // namespace mfgabs
