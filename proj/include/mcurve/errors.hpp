#pragma once

#include <stdexcept>
#include <string>

namespace mcurve {

// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Bad or inconsistent configuration (missing transform, wrong calendar, ...).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IntegrabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotImplementedError : std::logic_error {
    using std::logic_error::logic_error;
};

// Conditional expectation requested for a law outside the supported classes.
struct UnsupportedLawError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace mcurve
