// dynamics.hpp: semiclassical mean-field Bloch models of a two-level emitter
// in a Lorentz host, in the frame rotating at the drive carrier.
//
//   Model A (effective):    host eliminated, drive/NDD/decay renormalized by ℓ.
//   Model B (microscopic):  emitter (s, w) coupled to an explicit damped host
//                           oscillator amplitude β through C_a, C_b.
//
// Both models use the same sign convention (drive +wΩ/2, NDD -iε_a w s) so
// their trajectories can be compared pointwise.

#pragma once

#include "locfield/medium.hpp"
#include "locfield/ode.hpp"

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace locfield::dynamics {

using complex = std::complex<double>;

enum class DriveKind { off, constant, pulse };

struct DriveEnvelope {
    DriveKind kind = DriveKind::off;
    complex rabi{0.0, 0.0}; // Ω in units of γ_a
    double t_on = 0.0;      // pulse window [t_on, t_off)
    double t_off = 0.0;

    complex at(double t) const noexcept {
        switch (kind) {
        case DriveKind::off: return {0.0, 0.0};
        case DriveKind::constant: return rabi;
        case DriveKind::pulse: return (t >= t_on && t < t_off) ? rabi : complex{0.0, 0.0};
        }
        return {0.0, 0.0};
    }

    // Times at which the envelope is discontinuous.
    std::vector<double> breakpoints() const;

    bool operator==(const DriveEnvelope&) const = default;
};

struct EmitterParams {
    double detuning = 0.0;     // Δ_a = ω_p - ω_a
    double ndd_strength = 0.0; // ε_a
    double decay = 1.0;        // γ_a; 1 in scaled units, 0 allowed for undamped checks
    DriveEnvelope drive;

    bool operator==(const EmitterParams&) const = default;
};

void validate(const DriveEnvelope& d);
void validate(const EmitterParams& e);

// Effective (host-eliminated) model parameters.
struct EffectiveParams {
    EmitterParams emitter;
    complex ell{1.0, 0.0};

    static EffectiveParams from(const EmitterParams& e, const medium::HostSpecies& h);
};

void validate(const EffectiveParams& p);

// Microscopic model: emitter plus explicit host oscillator. The cross-couplings
// are public so fault-injection and what-if studies can perturb them; from()
// is the only constructor that guarantees the elimination identity.
struct MicroscopicParams {
    EmitterParams emitter;
    medium::HostSpecies host;
    double dipole_ratio = 0.0;  // ρ = sqrt(γ_b/γ_a)
    complex cross_a{0.0, 0.0};  // C_a = iε_b/ρ,  host -> emitter
    complex cross_b{0.0, 0.0};  // C_b = iρε_a - ργ_a/2, emitter -> host

    // α = i(Δ_b + ε_b + iγ_b/2)
    complex host_pole() const noexcept { return complex{0.0, 1.0} * host.pole(); }

    // Requires γ_a > 0 and γ_b > 0 (ρ is defined through both radiative rates).
    static MicroscopicParams from(const EmitterParams& e, const medium::HostSpecies& h);
};

void validate(const MicroscopicParams& p);

struct SystemState {
    complex s{0.0, 0.0};       // <σ₋>
    double w = -1.0;           // <σ₃>
    std::optional<complex> beta; // <ζ₋>, model B only

    double bloch_norm() const noexcept { return w * w + 4.0 * std::norm(s); }
};

struct StateDerivative {
    complex ds{0.0, 0.0};
    double dw = 0.0;
    std::optional<complex> dbeta;
};

StateDerivative effective_rhs(const SystemState& state, const EffectiveParams& p, double t);

// `state.beta` absent is read as β = 0.
StateDerivative microscopic_rhs(const SystemState& state, const MicroscopicParams& p, double t);

enum class Model { effective, microscopic };

const char* model_name(Model m) noexcept; // "A" / "B"

struct IntegrateOptions {
    double tol = 1e-9;            // rel = abs = tol; must lie in [1e-12, 1e-4]
    bool clamp_inversion = false; // hold w fixed (linearized weak-excitation runs)
    ode::Method method = ode::Method::dop853;
    std::size_t max_steps = 20'000'000;
};

struct IntegratorStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
    double tol = 0.0;
    double max_bloch_norm = 0.0;
    bool bloch_violation = false; // norm exceeded 1 + 100·tol somewhere
};

struct Trajectory {
    Model model = Model::effective;
    std::vector<double> times;
    std::vector<SystemState> states;
    IntegratorStats stats;
};

class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& what, Trajectory partial)
        : std::runtime_error(what), partial_(std::move(partial)) {}

    const Trajectory& partial() const noexcept { return partial_; }

private:
    Trajectory partial_;
};

// `grid` starts at the initial time and must be strictly increasing.
Trajectory integrate(const EffectiveParams& p, const SystemState& initial,
                     std::span<const double> grid, const IntegrateOptions& opts = {});
Trajectory integrate(const MicroscopicParams& p, const SystemState& initial,
                     std::span<const double> grid, const IntegrateOptions& opts = {});

// `samples` equally spaced points on [t0, t1], endpoints included.
std::vector<double> uniform_grid(double t0, double t1, std::size_t samples);

} // namespace locfield::dynamics
