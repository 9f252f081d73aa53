#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "aircomp/channel.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

// Affine energy map g(x) = scale * phi + offset; offset makes g nonnegative.
struct EnergyMap {
    double scale = 1.0;
    double offset = 0.0;
    double g(double phi) const { return scale * phi + offset; }
    // h: received energy -> estimate of sum_k phi_k, for K participants
    double h(double energy, int K) const { return (energy - K * offset) / scale; }
};

// sqrt(g) times a random-phase unimodular sequence.
inline CVec goldenbaum_modulate(double g_value, int Q, Stream& rng) {
    require(Q >= 1, "sequence length must be >= 1");
    if (g_value < 0.0) throw ConstraintViolation("energy map produced a negative value");
    const double a = std::sqrt(g_value);
    CVec x(static_cast<std::size_t>(Q));
    for (auto& v : x) v = std::polar(a, rng.phase());
    return x;
}

// e = max(|r|^2 / Q - noise, 0), then h(e).  Magnitudes are assumed pre-equalized.
inline double goldenbaum_energy(const CVec& r, double noise_variance) {
    require(!r.empty(), "empty received sequence");
    double e = 0.0;
    for (cplx v : r) e += std::norm(v);
    return std::max(e / static_cast<double>(r.size()) - noise_variance, 0.0);
}

inline double goldenbaum_demodulate(const CVec& r, int K, double noise_variance, const EnergyMap& map) {
    return map.h(goldenbaum_energy(r, noise_variance), K);
}

} // namespace aircomp
