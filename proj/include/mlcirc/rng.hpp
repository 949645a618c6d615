#pragma once

#include <cstdint>
#include <vector>

namespace mlcirc {

// Counter-based deterministic random stream. Each (seed, stream) pair is an
// independent sequence; reproducible across platforms and thread counts,
// unlike std::uniform_int_distribution whose output is implementation
// defined. Streams are cheap to fork, so parallel retries get stream ids
// derived from (operation, retry index) and stay reproducible.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : state_(mix(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        return mix(z);
    }

    // Uniform in [0, bound) by rejection; bound > 0.
    std::uint64_t next_below(std::uint64_t bound) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    // Bernoulli with exact rational probability num/den.
    bool next_bernoulli(std::uint64_t num, std::uint64_t den) {
        return next_below(den) < num;
    }

    // k distinct values from [0, n), via partial Fisher-Yates; sorted output.
    std::vector<std::uint32_t> sample_without_replacement(std::uint32_t n, std::uint32_t k);

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

// Fixed stream ids per randomized operation, so independent retries of
// different operations never share a sequence.
namespace rng_stream {
inline constexpr std::uint64_t construct_a = 1;
inline constexpr std::uint64_t construct_t = 2;
inline constexpr std::uint64_t partition_search = 3;
inline constexpr std::uint64_t special_t = 4;
inline constexpr std::uint64_t random_omega = 5;
} // namespace rng_stream

} // namespace mlcirc
