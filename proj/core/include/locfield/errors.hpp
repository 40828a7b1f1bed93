#pragma once

#include <stdexcept>
#include <string>

namespace locfield {

// Input rejected by a domain invariant. `field` names the offending input
// (e.g. "host.radiative_rate") so front ends can report it verbatim.
class ValidationError : public std::invalid_argument {
public:
    ValidationError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// The host pole Δ_b + ε_b + iγ_b/2 vanishes while ε_b > 0.
class SingularHostError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Least-squares extraction could not be performed on the requested window.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace locfield
