#pragma once

#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace aircomp {

// What a substream is used for. Part of the substream key so that, e.g., the
// noise of trial 7 never shares numbers with the channel of trial 7.
enum class Purpose : std::uint32_t {
    reading = 1,
    channel = 2,
    noise = 3,
    phase_error = 4,
    scheme = 5,
    impairment = 6,
    design = 7,
    scenario = 8,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

struct StreamKey {
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
    std::uint32_t node = 0;
    Purpose purpose = Purpose::reading;

    std::uint64_t hash() const {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ trial);
        h = splitmix64(h ^ (static_cast<std::uint64_t>(node) << 8 | static_cast<std::uint64_t>(purpose)));
        return h;
    }
};

// Counter-keyed random stream. Two streams built from the same key produce
// the same sequence no matter which thread builds them or when.
class Stream {
public:
    explicit Stream(std::uint64_t state) : eng_(state) {}
    explicit Stream(const StreamKey& key) : eng_(key.hash()) {}
    Stream(std::uint64_t seed, std::uint64_t trial, std::uint32_t node, Purpose p)
        : Stream(StreamKey{seed, trial, node, p}) {}

    double uniform(double lo = 0.0, double hi = 1.0) {
        return std::uniform_real_distribution<double>(lo, hi)(eng_);
    }
    long uniform_int(long lo, long hi) { // inclusive
        return std::uniform_int_distribution<long>(lo, hi)(eng_);
    }
    double normal(double mean = 0.0, double sd = 1.0) {
        return std::normal_distribution<double>(mean, sd)(eng_);
    }
    // CN(0, var): real and imaginary parts each carry var/2.
    std::complex<double> complex_normal(double var = 1.0) {
        const double sd = std::sqrt(var / 2.0);
        const double re = normal(0.0, sd);
        const double im = normal(0.0, sd);
        return {re, im};
    }
    double phase() { return uniform(0.0, 2.0 * std::numbers::pi); }

    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

} // namespace aircomp
