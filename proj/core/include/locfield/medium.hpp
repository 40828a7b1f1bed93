// medium.hpp: dielectric response of a single-pole Lorentz host and the
// local-field factor it induces on an embedded two-level emitter.
//
// Internal units: hbar = 1, rates and frequencies in units of the emitter's
// vacuum decay rate γ_a. GaussianInputs and the conversions below are the
// only place CGS-Gaussian quantities appear.

#pragma once

#include <complex>

namespace locfield::medium {

using complex = std::complex<double>;

namespace constants {
inline constexpr double hbar = 1.054571817e-27;   // erg s
inline constexpr double c = 2.99792458e10;        // cm / s
inline constexpr double pi = 3.14159265358979323846;
} // namespace constants

// Physical description of one species in CGS-Gaussian units.
struct GaussianInputs {
    double number_density = 0.0;    // cm^-3
    double dipole_moment = 0.0;     // statC cm
    double angular_frequency = 0.0; // rad / s
};

// Throws ValidationError unless density and dipole are finite and >= 0 and the
// angular frequency is finite and > 0.
void validate(const GaussianInputs& g);

// ε = 4πN|μ|²/(3ħ), in rad/s.
double ndd_strength(const GaussianInputs& g);

// γ = 4ω³|μ|²/(3c³ħ), in rad/s.
double radiative_rate(const GaussianInputs& g);

// Host oscillator parameters, all in units of γ_a.
struct HostSpecies {
    double detuning = 0.0;       // Δ_b = ω_p - ω_b
    double ndd_strength = 0.0;   // ε_b
    double radiative_rate = 0.0; // γ_b

    // Δ_b + ε_b + iγ_b/2
    complex pole() const noexcept { return {detuning + ndd_strength, 0.5 * radiative_rate}; }

    bool operator==(const HostSpecies&) const = default;
};

// Throws ValidationError on negative/non-finite rates and SingularHostError
// when ε_b > 0 and the pole vanishes.
void validate(const HostSpecies& h);

struct LocalFieldFactor {
    complex ell{1.0, 0.0};   // local-field enhancement factor
    complex index{1.0, 0.0}; // complex refractive index, Re(index) >= 0
};

// ℓ = 1 + ε_b/(Δ_b + ε_b + iγ_b/2), n = sqrt(3ℓ - 2) on the principal branch.
// ε_b = 0 yields ℓ = n = 1 exactly regardless of the pole.
LocalFieldFactor local_field_factor(const HostSpecies& h);

// Principal square root of 3ℓ - 2 (Re >= 0).
complex refractive_index(complex ell);

// |Im(ℓ)|·γ_a/2. Canonical magnitude of the level shift.
double level_shift(complex ell, double gamma_a);

// Signed frequency shift of the coherence in the rotating frame, -Im(ℓ)·γ_a/2:
// with ds/dt ∝ -(ℓγ_a/2)s the phase of s advances at this rate. Positive for
// an absorbing host (Im(ℓ) < 0).
double signed_level_shift(complex ell, double gamma_a);

struct RateComparison {
    double n = 1.0;
    double re_ell = 1.0;          // (n²+2)/3, the renormalized rate Γ/Γ₀
    double virtual_cavity = 1.0;  // n((n²+2)/3)²
    double onsager = 1.0;         // n(3n²/(2n²+1))²
};

// Lossless comparison of Γ/Γ₀ under the three prescriptions. Rejects n < 1.
RateComparison rate_comparison(double n);

// Scaled-unit parameters derived from Gaussian inputs of the emitter and host
// species sharing one carrier frequency. Rates are divided by γ_a.
struct ScaledSpecies {
    double gamma_a_rad_s = 0.0; // the unit, in rad/s
    double emitter_ndd = 0.0;   // ε_a / γ_a
    HostSpecies host;           // host.detuning = host_detuning_rad_s / γ_a
};

ScaledSpecies to_scaled(const GaussianInputs& emitter, const GaussianInputs& host,
                        double host_detuning_rad_s);

} // namespace locfield::medium
