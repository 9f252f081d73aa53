#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aircomp/error.hpp"

namespace aircomp {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    bool contains(double x, double tol = 0.0) const { return x >= lo - tol && x <= hi + tol; }
};

enum class FunctionKind {
    arithmetic_mean,
    sum,
    majority_vote,
    p_norm,
    geometric_mean,
    maximum,
    minimum,
    product,
    custom,
};

inline std::string to_string(FunctionKind k) {
    switch (k) {
    case FunctionKind::arithmetic_mean: return "arithmetic_mean";
    case FunctionKind::sum: return "sum";
    case FunctionKind::majority_vote: return "majority_vote";
    case FunctionKind::p_norm: return "p_norm";
    case FunctionKind::geometric_mean: return "geometric_mean";
    case FunctionKind::maximum: return "maximum";
    case FunctionKind::minimum: return "minimum";
    case FunctionKind::product: return "product";
    case FunctionKind::custom: return "custom";
    }
    return "unknown";
}

inline FunctionKind function_kind_from_string(const std::string& s) {
    static const std::pair<const char*, FunctionKind> names[] = {
        {"arithmetic_mean", FunctionKind::arithmetic_mean}, {"mean", FunctionKind::arithmetic_mean},
        {"sum", FunctionKind::sum},
        {"majority_vote", FunctionKind::majority_vote},
        {"p_norm", FunctionKind::p_norm},
        {"geometric_mean", FunctionKind::geometric_mean},
        {"maximum", FunctionKind::maximum}, {"max", FunctionKind::maximum},
        {"minimum", FunctionKind::minimum}, {"min", FunctionKind::minimum},
        {"product", FunctionKind::product},
        {"custom", FunctionKind::custom},
    };
    for (const auto& [name, kind] : names)
        if (s == name) return kind;
    throw InvalidInput("unknown function kind: " + s);
}

inline bool is_approximate(FunctionKind k) {
    return k == FunctionKind::geometric_mean || k == FunctionKind::maximum || k == FunctionKind::minimum;
}

struct Reading {
    double value = 0.0;
    int node_id = 1;
};

struct FunctionSpec {
    FunctionKind kind = FunctionKind::arithmetic_mean;
    // p for p_norm, precision p0 for the approximate kinds; unused otherwise.
    double param = 1.0;
    Interval input_range{0.0, 1.0};
    int K = 1;
    // Only for kind == custom.
    std::function<double(std::span<const double>)> custom_fn;

    void validate() const {
        require(K >= 1, "num_nodes must be >= 1");
        require(input_range.lo <= input_range.hi, "input_range lo > hi");
        require(std::isfinite(input_range.lo) && std::isfinite(input_range.hi), "input_range not finite");
        if (kind == FunctionKind::p_norm || is_approximate(kind))
            require(param > 0.0, "precision / p parameter must be > 0");
        if (kind == FunctionKind::custom) require(static_cast<bool>(custom_fn), "custom function without callback");
    }

    Interval output_range() const {
        const double lo = input_range.lo, hi = input_range.hi;
        const double k = K;
        switch (kind) {
        case FunctionKind::arithmetic_mean:
        case FunctionKind::geometric_mean:
        case FunctionKind::maximum:
        case FunctionKind::minimum: return {lo, hi};
        case FunctionKind::sum: return {k * lo, k * hi};
        case FunctionKind::majority_vote: return {-1.0, 1.0};
        case FunctionKind::p_norm: {
            const double big = std::max(std::abs(lo), std::abs(hi));
            const double small = (lo <= 0.0 && hi >= 0.0) ? 0.0 : std::min(std::abs(lo), std::abs(hi));
            const double g = std::pow(k, 1.0 / param);
            return {g * small, g * big};
        }
        case FunctionKind::product: {
            if (lo >= 0.0) return {std::pow(lo, k), std::pow(hi, k)};
            const double m = std::pow(std::max(std::abs(lo), std::abs(hi)), k);
            return {-m, m};
        }
        case FunctionKind::custom: break;
        }
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }
};

inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Ground truth f(s_1..s_K), computed directly.
inline double evaluate_function(const FunctionSpec& spec, std::span<const double> s) {
    require(!s.empty(), "empty readings");
    require(static_cast<int>(s.size()) == spec.K, "readings.size() != K");
    for (double v : s)
        if (!spec.input_range.contains(v, 1e-12 * (1.0 + std::abs(v))))
            throw InvalidInput("reading " + std::to_string(v) + " outside input range");
    const double k = static_cast<double>(s.size());
    switch (spec.kind) {
    case FunctionKind::arithmetic_mean: return std::accumulate(s.begin(), s.end(), 0.0) / k;
    case FunctionKind::sum: return std::accumulate(s.begin(), s.end(), 0.0);
    case FunctionKind::majority_vote: {
        double acc = 0.0;
        for (double v : s) acc += sign_of(v);
        return sign_of(acc);
    }
    case FunctionKind::p_norm: {
        double acc = 0.0;
        for (double v : s) acc += std::pow(std::abs(v), spec.param);
        return std::pow(acc, 1.0 / spec.param);
    }
    case FunctionKind::geometric_mean: {
        require(spec.input_range.lo >= 0.0, "geometric mean needs nonnegative inputs");
        double acc = 0.0;
        for (double v : s) {
            if (v == 0.0) return 0.0;
            acc += std::log(v);
        }
        return std::exp(acc / k);
    }
    case FunctionKind::maximum: return *std::max_element(s.begin(), s.end());
    case FunctionKind::minimum: return *std::min_element(s.begin(), s.end());
    case FunctionKind::product: {
        double acc = 1.0;
        for (double v : s) acc *= v;
        return acc;
    }
    case FunctionKind::custom: return spec.custom_fn(s);
    }
    throw InvalidInput("unsupported function kind");
}

inline double evaluate_function(const FunctionSpec& spec, std::span<const Reading> readings) {
    std::vector<double> v;
    v.reserve(readings.size());
    for (const auto& r : readings) v.push_back(r.value);
    return evaluate_function(spec, std::span<const double>(v));
}

// f(s) ~ Psi(psi_1(sum_k phi(s_k)), ..., psi_L(...)).
// The inputs are first mapped by u = (x + shift) / scale; Psi undoes it.
struct NomographicDecomposition {
    std::function<double(double)> preprocess;
    std::vector<std::function<double(double)>> postprocess;
    std::function<double(std::span<const double>)> aggregate;
    int num_resources = 1;

    bool exact = true;
    double epsilon = 0.0; // grid-measured sup error; 0 for exact kinds
    double shift = 0.0;
    double scale = 1.0;

    double pre(double x) const { return preprocess((x + shift) / scale); }

    double post(double superposed) const {
        std::vector<double> v;
        v.reserve(postprocess.size());
        for (const auto& p : postprocess) v.push_back(p(superposed));
        return aggregate(std::span<const double>(v));
    }

    double compose(std::span<const double> s) const {
        double acc = 0.0;
        for (double x : s) acc += pre(x);
        return post(acc);
    }
};

namespace detail {

// Sup error over an n x n grid of (a, b) where m nodes sit at a and the rest at b,
// for m in {1, K-1}.  a == b covers the all-equal diagonal.
inline double grid_sup_error(const FunctionSpec& spec, const NomographicDecomposition& d, int n) {
    const Interval r = spec.input_range;
    const int K = spec.K;
    std::vector<double> s(static_cast<std::size_t>(K));
    double worst = 0.0;
    std::vector<int> splits{1};
    if (K > 2) splits.push_back(K - 1);
    for (int i = 0; i < n; ++i) {
        const double a = n == 1 ? r.lo : r.lo + r.width() * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double b = n == 1 ? r.lo : r.lo + r.width() * j / (n - 1);
            for (int m : splits) {
                for (int k = 0; k < K; ++k) s[static_cast<std::size_t>(k)] = k < m ? a : b;
                const double truth = evaluate_function(spec, std::span<const double>(s));
                const double err = std::abs(d.compose(std::span<const double>(s)) - truth);
                if (!std::isfinite(err)) throw NumericalFailure("non-finite decomposition output; precision too large");
                worst = std::max(worst, err);
            }
        }
    }
    return worst;
}

} // namespace detail

inline NomographicDecomposition decompose(const FunctionSpec& spec, int eps_grid = 100) {
    spec.validate();
    NomographicDecomposition d;
    const double K = spec.K;
    const double p = spec.param;
    auto identity = [](double x) { return x; };
    d.aggregate = [](std::span<const double> v) { return v[0]; };

    switch (spec.kind) {
    case FunctionKind::arithmetic_mean:
        d.preprocess = [K](double x) { return x / K; };
        d.postprocess = {identity};
        break;
    case FunctionKind::sum:
        d.preprocess = identity;
        d.postprocess = {identity};
        break;
    case FunctionKind::majority_vote:
        d.preprocess = sign_of;
        d.postprocess = {sign_of};
        break;
    case FunctionKind::p_norm:
        d.preprocess = [p](double x) { return std::pow(std::abs(x), p); };
        d.postprocess = {[p](double x) { return std::pow(std::max(x, 0.0), 1.0 / p); }};
        break;
    case FunctionKind::product:
        require(spec.input_range.lo > 0.0, "product decomposition needs strictly positive inputs");
        d.preprocess = [](double x) { return std::log(x); };
        d.postprocess = {[](double x) { return std::exp(x); }};
        break;
    case FunctionKind::geometric_mean:
        require(spec.input_range.lo >= 0.0, "geometric mean needs nonnegative inputs");
        d.preprocess = [p](double x) { return std::log(x + 1.0 / p); };
        d.postprocess = {[K](double x) { return std::exp(x / K); }};
        d.exact = false;
        break;
    case FunctionKind::maximum: {
        // u = (x + shift) / scale lands in [0, 1]
        d.shift = spec.input_range.lo < 0.0 ? -spec.input_range.lo : 0.0;
        d.scale = spec.input_range.hi + d.shift > 0.0 ? spec.input_range.hi + d.shift : 1.0;
        d.preprocess = [p](double u) { return std::pow(std::max(u, 0.0), p); };
        d.postprocess = {[p](double x) { return std::pow(std::max(x, 0.0), 1.0 / p); }};
        d.exact = false;
        break;
    }
    case FunctionKind::minimum: {
        // u = (x + shift) / scale lands in (0, 1]
        d.shift = spec.input_range.lo <= 0.0 ? 1.0 - spec.input_range.lo : 0.0;
        d.scale = spec.input_range.hi + d.shift;
        d.preprocess = [p](double u) { return std::pow(u, -p); };
        d.postprocess = {[p](double x) { return std::pow(x, -1.0 / p); }};
        d.exact = false;
        break;
    }
    case FunctionKind::custom:
        throw InvalidInput("custom functions supply their own decomposition");
    }

    if (d.shift != 0.0 || d.scale != 1.0) {
        const double sh = d.shift, sc = d.scale;
        d.aggregate = [sh, sc](std::span<const double> v) { return v[0] * sc - sh; };
    }
    if (!d.exact) d.epsilon = detail::grid_sup_error(spec, d, eps_grid);
    return d;
}

} // namespace aircomp
