#pragma once

#include <stdexcept>
#include <string>

namespace vexp {

/// Non-finite value encountered during quadrature.
struct IntegrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A structural hypothesis ((V), (p), (H0) margins, ...) fails at a node.
struct HypothesisViolation : std::domain_error {
    using std::domain_error::domain_error;
};

/// |∇u|^p or a zero-order term overflowed; retry with smaller amplitude or finer grid.
struct EnergyOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mountain-pass path degenerated (maximum at an endpoint, phi(e) >= 0, ...).
struct InvalidGeometry : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested cone family does not fit in the grid.
struct CapacityError : std::invalid_argument {
    int max_feasible;
    CapacityError(const std::string& what, int max_k)
        : std::invalid_argument(what), max_feasible(max_k) {}
};

/// Malformed or out-of-range run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vexp
