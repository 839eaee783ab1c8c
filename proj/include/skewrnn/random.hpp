#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace skewrnn {

/// SplitMix64 finalizer. Used to derive independent seeds from a
/// (seed, stream) pair and from a global seed plus a run counter.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Fixed stream identifiers. Matrix entries and initial states never share
/// a generator, so changing one never perturbs the other.
enum class Stream : std::uint64_t {
    Matrix = 0x6D61747269780000ULL,
    State = 0x7374617465000000ULL,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream stream) noexcept
{
    return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream)));
}

/// Seed for the run at position `index` of a sweep. Counter based: appending
/// runs does not change the seeds of existing ones.
constexpr std::uint64_t run_seed(std::uint64_t global_seed, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(global_seed) + index);
}

/// Deterministic generator: mt19937_64 bits with portable transforms.
/// The standard library distributions are implementation defined, so
/// uniform and normal variates are produced here to stay bit-identical
/// across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    Rng(std::uint64_t seed, Stream stream) : engine_(derive_seed(seed, stream)) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01()
    {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (-bound, bound). Zero-probability endpoints are rejected.
    double uniform_symmetric(double bound)
    {
        for (;;) {
            const double u = 2.0 * uniform01() - 1.0;
            if (u != -1.0) return u * bound;
        }
    }

    /// Normal(0, stddev^2) via the Marsaglia polar method. The second
    /// variate of each pair is cached.
    double normal(double stddev)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_ * stddev;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform01() - 1.0;
            v = 2.0 * uniform01() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * m;
        has_spare_ = true;
        return u * m * stddev;
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace skewrnn
