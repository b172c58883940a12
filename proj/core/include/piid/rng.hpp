#pragma once

#include <cstdint>
#include <random>

namespace piid {

// splitmix64 finalizer; decorrelates nearby inputs.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// A seeded 64-bit random stream.
///
/// Replicated experiments use one stream per replication, derived from
/// (master seed, stream index). Results are therefore independent of worker
/// count and scheduling. Streams are cheap to construct and not thread-safe;
/// share nothing, derive one per task.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream derive(std::uint64_t master_seed, std::uint64_t stream_index) {
        return RngStream(mix64(mix64(master_seed) ^ mix64(stream_index)));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1); safe as a quantile-function argument.
    double uniform_open01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform label in {1, ..., k}.
    int uniform_label(int k) {
        return std::uniform_int_distribution<int>(1, k)(engine_);
    }

    /// Underlying engine, for use with <random> distributions.
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

}  // namespace piid
