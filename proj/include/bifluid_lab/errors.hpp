#pragma once
#include <stdexcept>
#include <string>

namespace bifluidlab {

// Inputs outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// A computation produced a non-finite value or failed to converge.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An optional capability (e.g. a declared pressure decomposition) is missing.
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A time-stepped field became non-finite.
struct BlowupError : std::runtime_error {
    BlowupError(const std::string& what, double when)
        : std::runtime_error(what), time(when) {}
    double time;
};

}  // namespace bifluidlab
