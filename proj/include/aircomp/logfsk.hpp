#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "aircomp/error.hpp"

namespace aircomp {

// Log-FSK tone: A * log(c cos(pi (2v+1) t / (2T)) + alpha), c = sqrt(2/T).
// Symbols are observed over [0, 2T) at midpoints t_m = (m + 1/2) 2T / N, which
// makes every harmonic cos(pi n t / (2T)) a DCT-II column and the receiver
// projection exact.
struct LogFskParams {
    double alpha = 2.0;
    double T = 1.0;
    int samples = 256;
    double amplitude = 1.0;

    double c() const { return std::sqrt(2.0 / T); }
    double t(int m) const { return (m + 0.5) * 2.0 * T / samples; }

    void validate() const {
        require(T > 0.0 && samples >= 2 && amplitude > 0.0, "bad Log-FSK parameters");
        if (!(alpha > c())) throw ConstraintViolation("Log-FSK alpha must exceed sqrt(2/T) so the log argument stays positive");
    }
};

inline std::vector<double> logfsk_modulate(int level, const LogFskParams& p) {
    p.validate();
    require(level >= 0, "negative Log-FSK level");
    std::vector<double> x(static_cast<std::size_t>(p.samples));
    const double c = p.c();
    for (int m = 0; m < p.samples; ++m) {
        const double arg = c * std::cos(std::numbers::pi * (2 * level + 1) * p.t(m) / (2.0 * p.T)) + p.alpha;
        if (!(arg > 0.0)) throw ConstraintViolation("nonpositive Log-FSK log argument");
        x[static_cast<std::size_t>(m)] = p.amplitude * std::log(arg);
    }
    return x;
}

// Cosine-series coefficients of z over harmonics 0..n_max.
inline std::vector<double> logfsk_harmonics(std::span<const double> z, int n_max) {
    const int N = static_cast<int>(z.size());
    require(n_max < N, "too few samples for the harmonic range");
    std::vector<double> coef(static_cast<std::size_t>(n_max + 1));
    for (int n = 0; n <= n_max; ++n) {
        double acc = 0.0;
        for (int m = 0; m < N; ++m) acc += z[static_cast<std::size_t>(m)] * std::cos(std::numbers::pi * n * (m + 0.5) / N);
        coef[static_cast<std::size_t>(n)] = acc * (n == 0 ? 1.0 : 2.0) / N;
    }
    return coef;
}

struct LogFskDetection {
    int harmonic = 0;   // n = sum_k (2 v_k + 1)
    int tone_index = 0; // floor(n / 2)
    long level_sum = 0; // sum_k v_k
};

// Detect on the product-domain signal z = exp(r / A).  Invariant to positive scaling of z.
inline LogFskDetection logfsk_detect(std::span<const double> z, int K, int levels, const LogFskParams& p) {
    require(K >= 1 && levels >= 1, "bad Log-FSK detection parameters");
    const int n_max = K * (2 * levels - 1);
    const auto coef = logfsk_harmonics(z, n_max);
    double peak = 0.0;
    for (double v : coef) peak = std::max(peak, std::abs(v));
    const double c = p.c();
    // The top harmonic carries c^K / 2^(K-1); no coefficient exceeds (alpha + c)^K.
    const double rho = 0.25 * (std::pow(c, K) / std::pow(2.0, K - 1)) / std::pow(p.alpha + c, K);
    const double thr = rho * peak;
    int best = K; // lowest admissible harmonic (all levels zero)
    for (int n = n_max; n >= K; n -= 2)
        if (std::abs(coef[static_cast<std::size_t>(n)]) >= thr && peak > 0.0) {
            best = n;
            break;
        }
    return {best, best / 2, (best - K) / 2};
}

inline LogFskDetection logfsk_demodulate(std::span<const double> r, int K, int levels, const LogFskParams& p) {
    std::vector<double> z(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) z[i] = std::exp(r[i] / p.amplitude);
    return logfsk_detect(z, K, levels, p);
}

} // namespace aircomp
