#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/error.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

// b = rho0 conj(h) / |h|^2 when |h|^2 >= g_th, else 0.
inline cplx truncated_inversion(cplx h, double rho0, double g_th) {
    require(g_th >= 0.0, "truncation threshold must be >= 0");
    const double g = std::norm(h);
    if (g == 0.0 && g_th == 0.0) throw NumericalFailure("cannot invert a zero channel");
    if (g < g_th) return {};
    return rho0 * std::conj(h) / g;
}

// sum_k min(sqrt(q_k / eta) - 1, 0)^2 + noise / eta, q_k = P_k |h_k|^2.
inline double power_objective(double eta, std::span<const double> quality, double noise_variance) {
    require(eta > 0.0, "eta must be positive");
    double acc = 0.0;
    for (double q : quality) {
        const double m = std::min(std::sqrt(q / eta) - 1.0, 0.0);
        acc += m * m;
    }
    return acc + noise_variance / eta;
}

struct PolicyCandidate {
    int k = 0;              // nodes 1..k (sorted) at full power
    double eta_tilde = 0.0; // stationary point of subproblem k
    double lo = 0.0;        // interval F_k
    double hi = 0.0;
    bool accepted = false;  // eta_tilde inside F_k
    double eta = 0.0;       // eta_tilde clamped into F_k
    double objective = 0.0;
};

struct PowerPolicy {
    std::vector<double> powers;     // per node, original order
    double eta = 1.0;
    int threshold_index = 0;        // number of full-power nodes
    double objective = 0.0;
    std::vector<int> order;         // node indices sorted by quality, ascending
    std::vector<double> quality;    // P_k |h_k|^2, original order
    std::vector<PolicyCandidate> candidates;
};

inline PowerPolicy solve_optimal_policy(std::span<const double> h_abs, std::span<const double> budgets,
                                        double noise_variance) {
    const std::size_t K = h_abs.size();
    require(K >= 1, "need at least one node");
    require(budgets.size() == K, "budget count != channel count");
    require(noise_variance >= 0.0, "negative noise variance");
    PowerPolicy pol;
    pol.quality.resize(K);
    bool any = false;
    for (std::size_t k = 0; k < K; ++k) {
        require(h_abs[k] >= 0.0 && budgets[k] > 0.0, "channel magnitudes must be >= 0 and budgets > 0");
        pol.quality[k] = budgets[k] * h_abs[k] * h_abs[k];
        any = any || pol.quality[k] > 0.0;
    }
    if (!any) throw NumericalFailure("all channels are zero");
    for (double q : pol.quality) require(q > 0.0, "zero channel magnitude");
    pol.order.resize(K);
    std::iota(pol.order.begin(), pol.order.end(), 0);
    std::stable_sort(pol.order.begin(), pol.order.end(),
                     [&](int a, int b) { return pol.quality[static_cast<std::size_t>(a)] < pol.quality[static_cast<std::size_t>(b)]; });
    std::vector<double> q(K);
    for (std::size_t i = 0; i < K; ++i) q[i] = pol.quality[static_cast<std::size_t>(pol.order[i])];

    if (noise_variance == 0.0) {
        pol.eta = q[0];
        pol.objective = 0.0;
        pol.candidates.push_back({0, q[0], 0.0, q[0], true, q[0], 0.0});
    } else {
        // F_0 = (0, q_1]: everyone inverts, objective noise/eta falls with eta.
        PolicyCandidate c0{0, q[0], 0.0, q[0], true, q[0], 0.0};
        c0.objective = power_objective(c0.eta, q, noise_variance);
        pol.candidates.push_back(c0);
        double sum_q = 0.0, sum_sq = 0.0;
        for (std::size_t k = 1; k <= K; ++k) {
            sum_q += q[k - 1];
            sum_sq += std::sqrt(q[k - 1]);
            PolicyCandidate c;
            c.k = static_cast<int>(k);
            c.eta_tilde = std::pow((noise_variance + sum_q) / sum_sq, 2.0);
            c.lo = q[k - 1];
            c.hi = k < K ? q[k] : INFINITY;
            c.accepted = c.eta_tilde >= c.lo && c.eta_tilde <= c.hi;
            c.eta = std::clamp(c.eta_tilde, c.lo, c.hi);
            c.objective = power_objective(c.eta, q, noise_variance);
            pol.candidates.push_back(c);
        }
        const PolicyCandidate* best = &pol.candidates[0];
        for (const auto& c : pol.candidates)
            if (c.objective < best->objective) best = &c;
        pol.eta = best->eta;
        pol.objective = best->objective;
    }
    if (!std::isfinite(pol.eta) || pol.eta <= 0.0) throw NumericalFailure("degenerate denoising factor");

    pol.powers.resize(K);
    pol.threshold_index = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (pol.quality[k] <= pol.eta) {
            pol.powers[k] = budgets[k];
            if (pol.quality[k] < pol.eta) ++pol.threshold_index;
        } else {
            pol.powers[k] = pol.eta / (h_abs[k] * h_abs[k]);
        }
    }
    return pol;
}

enum class Aggregate { mean, sum };

// y = sum_k sqrt(p_k) |h_k| e^{j err_k} s_k + w;  returns y / sqrt(eta), divided by K for the mean.
inline cplx apply_policy(std::span<const double> s, const PowerPolicy& pol, std::span<const cplx> h,
                         double noise_variance, Stream& noise, std::span<const double> phase_errors = {},
                         Aggregate agg = Aggregate::mean) {
    const std::size_t K = s.size();
    require(h.size() == K && pol.powers.size() == K, "policy/channel/reading size mismatch");
    require(phase_errors.empty() || phase_errors.size() == K, "phase error count mismatch");
    cplx y{};
    for (std::size_t k = 0; k < K; ++k) {
        // precoder sqrt(p_k) conj(h_k)/|h_k| built on the (possibly wrong) phase estimate
        cplx eff = std::sqrt(pol.powers[k]) * std::abs(h[k]);
        if (!phase_errors.empty()) eff *= std::polar(1.0, phase_errors[k]);
        y += eff * s[k];
    }
    if (noise_variance > 0.0) y += noise.complex_normal(noise_variance);
    y /= std::sqrt(pol.eta);
    return agg == Aggregate::mean ? y / static_cast<double>(K) : y;
}

} // namespace aircomp
