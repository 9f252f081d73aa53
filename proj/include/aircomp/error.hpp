#pragma once

#include <stdexcept>
#include <string>

namespace aircomp {

// Malformed input: bad ranges, wrong lengths, unknown names.
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Well-formed but infeasible: incompatible scheme/function, CP margin violated,
// infeasible constellation.
class ConstraintViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singular matrices, non-finite intermediate values.
class NumericalFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidInput(msg);
}

} // namespace aircomp
