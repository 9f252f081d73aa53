#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "aircomp/error.hpp"

namespace aircomp {

struct MetricsReport {
    double mse = 0.0;
    double nmse = 0.0;
    double outage_rate = 0.0;
    double cer = 0.0;
    long trial_count = 0;
    double confidence_halfwidth = 0.0; // 95 %, normal approximation, on mse
    double epsilon = 0.0;
    bool discrete = false;
};

// Two discrete estimates count as equal inside this relative slack.
inline bool same_value(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}

// Complex estimates: the error is |estimate - truth|.
inline MetricsReport compute_metrics(std::span<const double> truth, std::span<const std::complex<double>> est,
                                     double epsilon, bool discrete = false) {
    require(truth.size() == est.size(), "truth/estimate length mismatch");
    require(!truth.empty(), "no trials");
    require(epsilon > 0.0, "epsilon must be positive");

    const double n = static_cast<double>(truth.size());
    double se = 0.0, se2 = 0.0, t2 = 0.0, out = 0.0, wrong = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double sq = std::norm(est[i] - truth[i]);
        const double e = std::sqrt(sq);
        se += sq;
        se2 += sq * sq;
        t2 += truth[i] * truth[i];
        if (std::abs(e) >= epsilon) out += 1.0;
        if (discrete && !(est[i].imag() == 0.0 && same_value(truth[i], est[i].real()))) wrong += 1.0;
    }
    MetricsReport r;
    r.trial_count = static_cast<long>(truth.size());
    r.mse = se / n;
    const double mt2 = t2 / n;
    r.nmse = mt2 == 0.0 ? (r.mse == 0.0 ? 0.0 : INFINITY) : r.mse / mt2;
    r.outage_rate = out / n;
    r.cer = discrete ? wrong / n : 0.0;
    if (truth.size() > 1) {
        const double var = std::max(0.0, (se2 / n - r.mse * r.mse) * n / (n - 1.0));
        r.confidence_halfwidth = 1.96 * std::sqrt(var / n);
    }
    r.epsilon = epsilon;
    r.discrete = discrete;
    return r;
}

inline MetricsReport compute_metrics(std::span<const double> truth, std::span<const double> est, double epsilon,
                                     bool discrete = false) {
    require(truth.size() == est.size(), "truth/estimate length mismatch");
    std::vector<std::complex<double>> c(est.begin(), est.end());
    return compute_metrics(truth, std::span<const std::complex<double>>(c), epsilon, discrete);
}

} // namespace aircomp
