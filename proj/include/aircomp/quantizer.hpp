#pragma once

#include <algorithm>
#include <cmath>

#include "aircomp/error.hpp"
#include "aircomp/function.hpp"

namespace aircomp {

// M-level uniform quantizer; level i sits at lo + i * step.
class Quantizer {
public:
    Quantizer() = default;
    Quantizer(int levels, Interval range) : levels_(levels), range_(range) {
        require(levels >= 1, "quantizer needs at least one level");
        require(range.lo <= range.hi, "quantizer range lo > hi");
        step_ = levels > 1 ? range.width() / (levels - 1) : 0.0;
    }

    int levels() const { return levels_; }
    Interval range() const { return range_; }
    double step() const { return step_; }

    int index(double x) const {
        if (levels_ == 1 || step_ == 0.0) return 0;
        const long i = std::lround((x - range_.lo) / step_);
        return static_cast<int>(std::clamp<long>(i, 0, levels_ - 1));
    }
    double value(int i) const {
        require(i >= 0 && i < levels_, "quantizer index out of range");
        return range_.lo + i * step_;
    }
    double quantize(double x) const { return value(index(x)); }

private:
    int levels_ = 2;
    Interval range_{0.0, 1.0};
    double step_ = 1.0;
};

} // namespace aircomp
