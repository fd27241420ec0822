#pragma once

#include <stdexcept>
#include <string>

namespace qc {

// Bad user-facing parameter (out of range, unsupported combination).
struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Caller broke a documented precondition (unnormalized input, asymmetric matrix).
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyWindowError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace qc
