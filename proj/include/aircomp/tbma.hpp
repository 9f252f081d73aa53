#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/function.hpp"
#include "aircomp/quantizer.hpp"

namespace aircomp {

class NoDetection : public ConstraintViolation {
public:
    using ConstraintViolation::ConstraintViolation;
};

// FSK tone selection: unit amplitude on the resource of the quantized level.
inline std::vector<CVec> tbma_modulate(std::span<const double> s, const Quantizer& q) {
    std::vector<CVec> out;
    out.reserve(s.size());
    for (double x : s) {
        CVec v(static_cast<std::size_t>(q.levels()), cplx{});
        v[static_cast<std::size_t>(q.index(x))] = 1.0;
        out.push_back(std::move(v));
    }
    return out;
}

// Default threshold for max/min bin detection.
inline double tbma_default_threshold(int K, int M) { return std::min(static_cast<double>(K) / (2.0 * M), 0.5); }

struct TbmaOptions {
    double threshold = -1.0; // < 0 selects tbma_default_threshold
};

// Highest (or lowest) bin at or above the threshold.
inline std::optional<int> tbma_extreme_bin(std::span<const double> type, double threshold, bool highest) {
    const int M = static_cast<int>(type.size());
    if (highest) {
        for (int l = M - 1; l >= 0; --l)
            if (type[static_cast<std::size_t>(l)] >= threshold) return l;
    } else {
        for (int l = 0; l < M; ++l)
            if (type[static_cast<std::size_t>(l)] >= threshold) return l;
    }
    return std::nullopt;
}

// f from a (possibly noisy) received type.  Level values come from the
// quantizer grid; non-positive levels contribute ln 1 = 0 to the geometric mean.
inline double tbma_demodulate(std::span<const double> type, const FunctionSpec& spec, int K, const Quantizer& q,
                              TbmaOptions opt = {}) {
    require(static_cast<int>(type.size()) == q.levels(), "type length != quantizer levels");
    require(K >= 1, "K must be >= 1");
    const double k = K;
    auto level = [&](std::size_t l) { return q.value(static_cast<int>(l)); };
    double acc = 0.0;
    switch (spec.kind) {
    case FunctionKind::arithmetic_mean:
    case FunctionKind::sum:
        for (std::size_t l = 0; l < type.size(); ++l) acc += level(l) * type[l];
        return spec.kind == FunctionKind::sum ? acc : acc / k;
    case FunctionKind::geometric_mean:
        for (std::size_t l = 0; l < type.size(); ++l) {
            const double v = level(l);
            acc += (type[l] / k) * (v > 0.0 ? std::log(v) : 0.0);
        }
        return std::exp(acc);
    case FunctionKind::product:
        for (std::size_t l = 0; l < type.size(); ++l) {
            const double v = level(l);
            acc += type[l] * (v > 0.0 ? std::log(v) : 0.0);
        }
        return std::exp(acc);
    case FunctionKind::majority_vote:
        for (std::size_t l = 0; l < type.size(); ++l) acc += sign_of(level(l)) * type[l];
        return sign_of(acc);
    case FunctionKind::p_norm:
        for (std::size_t l = 0; l < type.size(); ++l) acc += std::pow(std::abs(level(l)), spec.param) * type[l];
        return std::pow(std::max(acc, 0.0), 1.0 / spec.param);
    case FunctionKind::maximum:
    case FunctionKind::minimum: {
        const double thr = opt.threshold < 0.0 ? tbma_default_threshold(K, q.levels()) : opt.threshold;
        if (!(thr > 0.0)) throw ConstraintViolation("TBMA max/min needs a positive detection threshold");
        const auto bin = tbma_extreme_bin(type, thr, spec.kind == FunctionKind::maximum);
        if (!bin) throw NoDetection("no TBMA bin above threshold");
        return level(static_cast<std::size_t>(*bin));
    }
    case FunctionKind::custom: break;
    }
    throw ConstraintViolation("TBMA cannot compute function " + to_string(spec.kind));
}

inline std::vector<double> real_part(std::span<const cplx> y) {
    std::vector<double> r;
    r.reserve(y.size());
    for (cplx v : y) r.push_back(v.real());
    return r;
}

} // namespace aircomp
