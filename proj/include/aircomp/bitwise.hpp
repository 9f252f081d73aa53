#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/quantizer.hpp"

namespace aircomp {

inline long ipow(long b, int e) {
    long r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Digit d (least significant first) of each node becomes the polar level
// (p-1) - 2*digit on resource d.
inline CVec bitwise_symbols(int level_index, int base, int digits) {
    require(base >= 2 && digits >= 1, "bitwise needs base >= 2 and digits >= 1");
    require(level_index >= 0, "negative level index");
    if (level_index >= ipow(base, digits)) throw ConstraintViolation("value overflows digit capacity");
    CVec sym(static_cast<std::size_t>(digits));
    int v = level_index;
    for (int d = 0; d < digits; ++d) {
        const int digit = v % base;
        v /= base;
        sym[static_cast<std::size_t>(d)] = cplx{static_cast<double>((base - 1) - 2 * digit), 0.0};
    }
    return sym;
}

inline std::vector<CVec> bitwise_modulate(std::span<const double> s, const Quantizer& q, int base, int digits) {
    std::vector<CVec> out;
    out.reserve(s.size());
    for (double x : s) out.push_back(bitwise_symbols(q.index(x), base, digits));
    return out;
}

// Per-resource digit sums are rounded onto [0, K(p-1)] then recombined.
// Returns the sum of level indices (or its mean when average is set).
inline double bitwise_demodulate(std::span<const double> y, int K, int base, bool average = false) {
    require(K >= 1, "K must be >= 1");
    require(base >= 2, "base must be >= 2");
    const double top = static_cast<double>(K) * (base - 1);
    double total = 0.0, weight = 1.0;
    for (double yl : y) {
        const double digit_sum = std::clamp(std::round((top - yl) / 2.0), 0.0, top);
        total += weight * digit_sum;
        weight *= base;
    }
    return average ? total / K : total;
}

inline double bitwise_demodulate(std::span<const cplx> y, int K, int base, bool average = false) {
    std::vector<double> re;
    re.reserve(y.size());
    for (cplx v : y) re.push_back(v.real());
    return bitwise_demodulate(std::span<const double>(re), K, base, average);
}

} // namespace aircomp
