#pragma once

// Counter-based random stream.
//
// Draw number `cursor` of a stream keyed by `seed` is a pure function of
// (seed, cursor): the 64-bit word is splitmix64_mix(seed + (cursor + 1) * G)
// with G = 0x9E3779B97F4A7C15, i.e. the SplitMix64 sequence evaluated at an
// explicit position. Bounded integers use Lemire's multiply-shift with
// rejection; rejected attempts re-hash (word, attempt) so that one logical
// draw always advances the cursor by exactly one.
//
// Per-run streams are derived with substream(k): seed' = mix(seed ^ mix(k + G)),
// the same avalanche mix applied to the run index.

#include <cstdint>

namespace dw {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer (Stafford variant 13).
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// run_seed = mix(master_seed, run_index).
constexpr std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64_mix(master_seed ^ splitmix64_mix(index + kGolden));
}

class RandomStream {
public:
    explicit RandomStream(std::uint64_t master_seed, std::uint64_t cursor = 0)
        : seed_(master_seed), cursor_(cursor) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t cursor() const { return cursor_; }

    /// Independent stream for run `index`; starts at cursor 0.
    RandomStream substream(std::uint64_t index) const { return RandomStream(mix_seed(seed_, index)); }

    /// Raw 64-bit word at the current cursor.
    std::uint64_t next_u64() { return word(cursor_++, 0); }

    /// Uniform integer in [0, bound); bound must be > 0. Exactly uniform.
    std::uint64_t uniform_index(std::uint64_t bound);

    /// Uniform double in the open interval (0,1), 53-bit resolution.
    double uniform_open01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
    }

    bool operator==(const RandomStream&) const = default;

private:
    std::uint64_t word(std::uint64_t position, std::uint64_t attempt) const {
        const std::uint64_t base = splitmix64_mix(seed_ + (position + 1) * kGolden);
        return attempt == 0 ? base : splitmix64_mix(base + attempt * kGolden);
    }

    std::uint64_t seed_;
    std::uint64_t cursor_;
};

inline std::uint64_t RandomStream::uniform_index(std::uint64_t bound) {
    const std::uint64_t position = cursor_++;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (std::uint64_t attempt = 0;; ++attempt) {
        const unsigned __int128 m = static_cast<unsigned __int128>(word(position, attempt)) * bound;
        if (static_cast<std::uint64_t>(m) >= threshold) return static_cast<std::uint64_t>(m >> 64);
    }
}

}  // namespace dw
