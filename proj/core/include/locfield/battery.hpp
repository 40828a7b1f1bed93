// battery.hpp: the built-in verification battery run by `locfield verify`.

#pragma once

#include "locfield/verify.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace locfield::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;     // measured worst-case quantity
    double threshold = 0.0; // pass iff value <= threshold
    std::string detail;
};

struct BatteryOptions {
    std::uint64_t seed = 0x5eed'10ca1f1e1dULL;
    bool parallel = false;
    // fault injection: flip the sign of C_b in every microscopic model built
    bool corrupt_cross_b = false;
};

struct BatteryReport {
    std::vector<CheckResult> checks;
    std::vector<ConvergenceRow> convergence;

    bool all_passed() const noexcept;
};

// Reference microscopic scenario: Δ_a = ε_a = 0, γ_a = 1, host (Δ_b, ε_b, γ_b) = (10, 10, 4).
MicroscopicParams reference_scenario();

BatteryReport run_battery(const BatteryOptions& opts = {});

} // namespace locfield::verify
