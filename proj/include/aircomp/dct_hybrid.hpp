#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aircomp/error.hpp"

namespace aircomp {

// Orthonormal DCT-II of f sampled on a J-point grid.
inline std::vector<double> dct2(std::span<const double> f) {
    const int J = static_cast<int>(f.size());
    require(J >= 1, "empty DCT input");
    std::vector<double> F(static_cast<std::size_t>(J));
    for (int i = 0; i < J; ++i) {
        double acc = 0.0;
        for (int s = 0; s < J; ++s) acc += f[static_cast<std::size_t>(s)] * std::cos(std::numbers::pi * i * (2 * s + 1) / (2.0 * J));
        F[static_cast<std::size_t>(i)] = acc * std::sqrt((i == 0 ? 1.0 : 2.0) / J);
    }
    return F;
}

// Synthesis at grid index s from coefficients F_0..F_{n-1} (truncated series).
inline double idct2_at(std::span<const double> F, int J, int s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i)
        acc += F[i] * std::sqrt((i == 0 ? 1.0 : 2.0) / J) * std::cos(std::numbers::pi * static_cast<double>(i) * (2 * s + 1) / (2.0 * J));
    return acc;
}

struct DctHybridParams {
    std::vector<double> coeffs; // F_1..F_I
    double dc = 0.0;            // F_0, known at the receiver
    int grid = 8;               // J, number of admissible s
    double T = 1.0;
    int samples = 64;
    double amplitude = 1.0;

    int I() const { return static_cast<int>(coeffs.size()); }
    double t(int n) const { return (n + 0.5) * T / samples; }

    void validate() const {
        require(I() >= 1, "DCT hybrid needs at least one coefficient");
        require(grid >= 1 && T > 0.0 && amplitude > 0.0, "bad DCT hybrid parameters");
        // highest tone I(2J-1)/(4T) Hz against N/T samples per second
        if (!(2.0 * samples > static_cast<double>(I()) * (2 * grid - 1)))
            throw ConstraintViolation("DCT hybrid sampling violates Nyquist for the top tone");
    }
};

inline double dct_tone(int i, int s, double t, double T) {
    return std::cos(std::numbers::pi * i * (2 * s + 1) * t / (2.0 * T));
}

inline std::vector<double> dct_hybrid_modulate(int s, const DctHybridParams& p) {
    p.validate();
    require(s >= 0 && s < p.grid, "DCT hybrid grid index out of range");
    std::vector<double> x(static_cast<std::size_t>(p.samples), 0.0);
    const double g = p.amplitude * std::sqrt(2.0 / p.samples);
    for (int n = 0; n < p.samples; ++n)
        for (int i = 1; i <= p.I(); ++i)
            x[static_cast<std::size_t>(n)] += g * p.coeffs[static_cast<std::size_t>(i - 1)] * dct_tone(i, s, p.t(n), p.T);
    return x;
}

struct DctHybridEstimate {
    int s = 0;
    std::vector<double> coeffs; // F_1..F_I estimates
    double value = 0.0;         // f estimate at s, DC included
};

// Matched-filter grid search: least-squares fit of the I tones at each candidate
// s, smallest residual wins (ties to the smaller s).
inline DctHybridEstimate dct_hybrid_demodulate(std::span<const double> r, const DctHybridParams& p) {
    p.validate();
    require(static_cast<int>(r.size()) == p.samples, "DCT hybrid sample count mismatch");
    const int N = p.samples, I = p.I();
    Eigen::Map<const Eigen::VectorXd> y(r.data(), N);
    const double g = p.amplitude * std::sqrt(2.0 / N);
    DctHybridEstimate best;
    double best_res = INFINITY;
    for (int s = 0; s < p.grid; ++s) {
        Eigen::MatrixXd B(N, I);
        for (int n = 0; n < N; ++n)
            for (int i = 1; i <= I; ++i) B(n, i - 1) = g * dct_tone(i, s, p.t(n), p.T);
        const Eigen::VectorXd F = B.colPivHouseholderQr().solve(y);
        const double res = (y - B * F).squaredNorm();
        if (best.coeffs.empty() || res < best_res - 1e-12 * (1.0 + best_res)) {
            best_res = res;
            best.s = s;
            best.coeffs.assign(F.data(), F.data() + I);
        }
    }
    std::vector<double> full{p.dc};
    full.insert(full.end(), best.coeffs.begin(), best.coeffs.end());
    best.value = idct2_at(full, p.grid, best.s);
    return best;
}

} // namespace aircomp
