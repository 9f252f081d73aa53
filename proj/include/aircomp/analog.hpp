#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "aircomp/channel.hpp"
#include "aircomp/function.hpp"

namespace aircomp {

// One resource per node carrying phi(s_k) as amplitude.
inline std::vector<CVec> analog_da_modulate(std::span<const double> s, const NomographicDecomposition& d,
                                            double max_amplitude = INFINITY) {
    std::vector<CVec> out;
    out.reserve(s.size());
    for (double x : s) {
        const double a = d.pre(x);
        if (!std::isfinite(a) || std::abs(a) > max_amplitude)
            throw ConstraintViolation("preprocessed value outside modulator range");
        out.push_back(CVec{cplx{a, 0.0}});
    }
    return out;
}

// Synchronous detection keeps the in-phase part.
inline double analog_da_demodulate(cplx y, const NomographicDecomposition& d) { return d.post(y.real()); }

} // namespace aircomp
