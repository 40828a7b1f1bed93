// verify.hpp: executable checks that eliminating the host oscillator turns
// the microscopic model into the ℓ-renormalized effective model.

#pragma once

#include "locfield/dynamics.hpp"

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace locfield::verify {

using complex = std::complex<double>;
using dynamics::EffectiveParams;
using dynamics::EmitterParams;
using dynamics::MicroscopicParams;

inline constexpr double kIdentityThreshold = 1e-12;
inline constexpr double kDegeneracyThreshold = 1e-9;
inline constexpr double kMaxHostPole = 1e3; // |α| cap, in γ_a

struct EliminationResult {
    complex ell{1.0, 0.0};
    EffectiveParams effective;
    double drive_residual = 0.0;     // |1 + C_aρ/α - ℓ| / max(1, |ℓ|)
    double coherence_residual = 0.0; // |C_aC_b/α - (ℓ-1)(iε_a - γ_a/2)| / max(1, |rhs|)
    double residual = 0.0;           // max of the two

    bool holds() const noexcept { return residual <= kIdentityThreshold; }
};

// Adiabatic elimination of β: with β slaved to its quasi-steady value
// (ρΩ/2 - C_b s)/α, the drive is multiplied by 1 + C_aρ/α and the coherence
// picks up -C_aC_b/α·w·s. Both must equal the ℓ-renormalized terms.
EliminationResult eliminate_host(const MicroscopicParams& p);

// Coefficient matrix of the (s, β) system linearized at w = -1, Ω = 0.
std::array<std::array<complex, 2>, 2> linearized_matrix(const MicroscopicParams& p);

struct EigenPair {
    complex slow{0.0, 0.0}; // root closer to A = iΔ_a + iε_a - γ_a/2
    complex fast{0.0, 0.0};
    bool degenerate = false; // |discriminant| below kDegeneracyThreshold
};

EigenPair slow_eigenvalue(const MicroscopicParams& p);

// iΔ_a + iℓε_a - ℓγ_a/2: coherence eigenvalue of the effective model at w = -1.
complex predicted_slow_eigenvalue(complex ell, const EmitterParams& e);

enum class Observable {
    coherence,  // |s|
    population, // w + 1
};

struct FitWindow {
    double begin = 0.0;
    double end = 0.0;
};

// [2/Γ, 6/Γ]: skips the fast host transient, stays above round-off.
FitWindow default_window(double rate_guess);

struct FitResult {
    double rate = 0.0;      // -d log(observable)/dt
    double frequency = 0.0; // d arg(s)/dt (fit_frequency only)
    double residual = 0.0;  // RMS of the fitted log-amplitude (or phase) residuals
    FitWindow window;
    std::size_t samples = 0;
};

inline constexpr std::size_t kMinFitSamples = 20;

// Least-squares line through log(y) on samples with t in [begin, end].
FitResult fit_log_linear(std::span<const double> t, std::span<const double> y, FitWindow window);

// Unwrapped phase of z, least-squares slope. Also fills rate from log|z|.
FitResult fit_phase(std::span<const double> t, std::span<const complex> z, FitWindow window);

FitResult fit_decay(const dynamics::Trajectory& traj, Observable obs, FitWindow window);
FitResult fit_frequency(const dynamics::Trajectory& traj, FitWindow window);

// β on the slow eigenvector for a given coherence s: (A - λ_slow)s/C_a,
// zero when the host is decoupled.
complex slow_mode_beta(const MicroscopicParams& p, complex s);

// Weak-excitation initial state on the slow eigenvector of the linearized
// (s, β) system: |s| = amplitude, w on the Bloch sphere near -1.
dynamics::SystemState slow_mode_state(const MicroscopicParams& p, double amplitude);

// Host scaled by κ: Δ_b, ε_b, γ_b → κΔ_b, κε_b, κγ_b (ℓ invariant).
MicroscopicParams scale_host(const MicroscopicParams& base, double kappa);

struct ConvergenceRow {
    double kappa = 1.0;
    complex exact{0.0, 0.0};
    complex predicted{0.0, 0.0};
    double eigen_error = 0.0;    // |exact - predicted|
    double fitted_rate = 0.0;    // coherence decay from full nonlinear model B
    double rate_error = 0.0;     // relative to -Re(predicted)
    double fitted_shift = 0.0;   // ω_fit - Δ_a
    double shift_error = 0.0;    // relative to Im(predicted) - Δ_a
};

struct ConvergenceOptions {
    double tol = 1e-11;
    double amplitude = 1e-3;
    std::size_t samples = 401;
    bool parallel = false;
};

// κ must be strictly increasing and keep |α| ≤ kMaxHostPole.
std::vector<ConvergenceRow> convergence_study(const MicroscopicParams& base,
                                              std::span<const double> kappas,
                                              const ConvergenceOptions& opts = {});

// Integrates model B from slow_mode_state over the default window of the
// predicted rate and fits both decay and frequency of s.
FitResult simulate_coherence_fit(const MicroscopicParams& p, const ConvergenceOptions& opts);

} // namespace locfield::verify
