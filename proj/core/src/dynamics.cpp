#include "locfield/dynamics.hpp"

#include "locfield/errors.hpp"
#include "locfield/ode.hpp"

#include <cmath>

namespace locfield::dynamics {

namespace {

constexpr complex I{0.0, 1.0};

void require_finite(double v, const char* field) {
    if (!std::isfinite(v)) throw ValidationError(field, "must be finite");
}

void validate_initial(const SystemState& s, double tol) {
    require_finite(s.s.real(), "initial.s");
    require_finite(s.s.imag(), "initial.s");
    require_finite(s.w, "initial.w");
    const double delta = 100.0 * tol;
    if (s.w < -1.0 - delta || s.w > 1.0 + delta) {
        throw ValidationError("initial.w", "inversion must lie in [-1, 1]");
    }
    if (s.bloch_norm() > 1.0 + delta) {
        throw ValidationError("initial", "state lies outside the Bloch sphere (w^2 + 4|s|^2 > 1)");
    }
    if (s.beta) {
        require_finite(s.beta->real(), "initial.beta");
        require_finite(s.beta->imag(), "initial.beta");
    }
}

void validate_grid(std::span<const double> grid) {
    if (grid.size() < 2) throw ValidationError("grid", "needs at least two time points");
    for (double t : grid) require_finite(t, "grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw ValidationError("grid", "times must be strictly increasing");
        }
    }
}

void validate_options(const IntegrateOptions& o) {
    if (!(o.tol >= 1e-12 && o.tol <= 1e-4)) {
        throw ValidationError("tol", "must lie in [1e-12, 1e-4]");
    }
}

template <std::size_t N, class Rhs, class Unpack>
Trajectory run(Model model, Rhs&& rhs, const ode::Vec<N>& y0, Unpack&& unpack,
               std::span<const double> grid, const IntegrateOptions& opts,
               std::span<const double> breakpoints) {
    ode::Options o;
    o.tol = {opts.tol, opts.tol};
    o.method = opts.method;
    o.max_steps = opts.max_steps;
    auto sol = ode::solve<N>(rhs, y0, grid, o, breakpoints);

    Trajectory traj;
    traj.model = model;
    traj.times = std::move(sol.times);
    traj.states.reserve(sol.states.size());
    for (const auto& y : sol.states) traj.states.push_back(unpack(y));
    traj.stats.steps = sol.stats.steps;
    traj.stats.rejected = sol.stats.rejected;
    traj.stats.rhs_evals = sol.stats.rhs_evals;
    traj.stats.tol = opts.tol;
    for (const auto& st : traj.states) {
        traj.stats.max_bloch_norm = std::max(traj.stats.max_bloch_norm, st.bloch_norm());
    }
    traj.stats.bloch_violation = traj.stats.max_bloch_norm > 1.0 + 100.0 * opts.tol;

    if (!sol.complete) {
        throw IntegrationError(std::string("model ") + model_name(model) + ": " + sol.failure,
                               std::move(traj));
    }
    return traj;
}

} // namespace

std::vector<double> DriveEnvelope::breakpoints() const {
    if (kind == DriveKind::pulse) return {t_on, t_off};
    return {};
}

void validate(const DriveEnvelope& d) {
    require_finite(d.rabi.real(), "drive.rabi");
    require_finite(d.rabi.imag(), "drive.rabi");
    if (d.kind == DriveKind::pulse) {
        require_finite(d.t_on, "drive.t_on");
        require_finite(d.t_off, "drive.t_off");
        if (!(d.t_on < d.t_off)) throw ValidationError("drive.t_off", "pulse needs t_on < t_off");
    }
}

void validate(const EmitterParams& e) {
    require_finite(e.detuning, "emitter.detuning");
    if (!std::isfinite(e.ndd_strength) || e.ndd_strength < 0.0) {
        throw ValidationError("emitter.ndd_strength", "must be finite and non-negative");
    }
    if (!std::isfinite(e.decay) || e.decay < 0.0) {
        throw ValidationError("emitter.decay", "must be finite and non-negative");
    }
    validate(e.drive);
}

EffectiveParams EffectiveParams::from(const EmitterParams& e, const medium::HostSpecies& h) {
    validate(e);
    return {e, medium::local_field_factor(h).ell};
}

void validate(const EffectiveParams& p) {
    validate(p.emitter);
    if (!std::isfinite(p.ell.real()) || !std::isfinite(p.ell.imag()) || p.ell.real() <= 0.0) {
        throw ValidationError("ell", "local-field factor must be finite with Re(ell) > 0");
    }
}

MicroscopicParams MicroscopicParams::from(const EmitterParams& e, const medium::HostSpecies& h) {
    validate(e);
    medium::validate(h);
    if (e.decay <= 0.0) {
        throw ValidationError("emitter.decay", "microscopic model needs gamma_a > 0");
    }
    if (h.radiative_rate <= 0.0) {
        throw ValidationError("host.radiative_rate",
                              "microscopic model needs gamma_b > 0 (dipole ratio sqrt(gamma_b/gamma_a))");
    }
    MicroscopicParams p;
    p.emitter = e;
    p.host = h;
    p.dipole_ratio = std::sqrt(h.radiative_rate / e.decay);
    p.cross_a = I * h.ndd_strength / p.dipole_ratio;
    p.cross_b = p.dipole_ratio * (I * e.ndd_strength - 0.5 * e.decay);
    if (p.host_pole() == complex{0.0, 0.0}) {
        throw SingularHostError("host pole alpha is zero");
    }
    return p;
}

void validate(const MicroscopicParams& p) {
    validate(p.emitter);
    medium::validate(p.host);
    if (!(p.dipole_ratio > 0.0) || !std::isfinite(p.dipole_ratio)) {
        throw ValidationError("dipole_ratio", "must be finite and positive");
    }
    if (p.host_pole() == complex{0.0, 0.0}) throw SingularHostError("host pole alpha is zero");
}

StateDerivative effective_rhs(const SystemState& st, const EffectiveParams& p, double t) {
    const auto& e = p.emitter;
    const complex ell = p.ell;
    const complex omega = e.drive.at(t);
    const complex s = st.s;
    const double w = st.w;

    StateDerivative d;
    d.ds = I * e.detuning * s - I * ell * e.ndd_strength * w * s + 0.5 * ell * omega * w -
           0.5 * ell * e.decay * s;
    const complex omega_eff = ell * omega - 2.0 * I * ell * e.ndd_strength * s;
    d.dw = -ell.real() * e.decay * (w + 1.0) - 2.0 * (omega_eff * std::conj(s)).real();
    return d;
}

StateDerivative microscopic_rhs(const SystemState& st, const MicroscopicParams& p, double t) {
    const auto& e = p.emitter;
    const complex omega = e.drive.at(t);
    const complex s = st.s;
    const complex beta = st.beta.value_or(complex{0.0, 0.0});
    const double w = st.w;

    StateDerivative d;
    d.ds = I * e.detuning * s - I * e.ndd_strength * w * s + 0.5 * omega * w - 0.5 * e.decay * s +
           p.cross_a * w * beta;
    d.dbeta = p.host_pole() * beta - 0.5 * p.dipole_ratio * omega + p.cross_b * s;
    const complex omega_tot = omega + 2.0 * p.cross_a * beta - 2.0 * I * e.ndd_strength * s;
    d.dw = -e.decay * (w + 1.0) - 2.0 * (omega_tot * std::conj(s)).real();
    return d;
}

const char* model_name(Model m) noexcept {
    return m == Model::effective ? "A" : "B";
}

Trajectory integrate(const EffectiveParams& p, const SystemState& initial,
                     std::span<const double> grid, const IntegrateOptions& opts) {
    validate(p);
    validate_options(opts);
    validate_grid(grid);
    validate_initial(initial, opts.tol);
    if (initial.beta) throw ValidationError("initial.beta", "model A has no host amplitude");

    const bool clamp = opts.clamp_inversion;
    auto rhs = [&p, clamp](double t, const ode::Vec<3>& y) {
        const SystemState st{{y[0], y[1]}, y[2], std::nullopt};
        const auto d = effective_rhs(st, p, t);
        return ode::Vec<3>{d.ds.real(), d.ds.imag(), clamp ? 0.0 : d.dw};
    };
    auto unpack = [](const ode::Vec<3>& y) { return SystemState{{y[0], y[1]}, y[2], std::nullopt}; };
    const ode::Vec<3> y0{initial.s.real(), initial.s.imag(), initial.w};
    const auto bps = p.emitter.drive.breakpoints();
    return run<3>(Model::effective, rhs, y0, unpack, grid, opts, bps);
}

Trajectory integrate(const MicroscopicParams& p, const SystemState& initial,
                     std::span<const double> grid, const IntegrateOptions& opts) {
    validate(p);
    validate_options(opts);
    validate_grid(grid);
    validate_initial(initial, opts.tol);

    const bool clamp = opts.clamp_inversion;
    auto rhs = [&p, clamp](double t, const ode::Vec<5>& y) {
        const SystemState st{{y[0], y[1]}, y[2], complex{y[3], y[4]}};
        const auto d = microscopic_rhs(st, p, t);
        return ode::Vec<5>{d.ds.real(), d.ds.imag(), clamp ? 0.0 : d.dw, d.dbeta->real(),
                           d.dbeta->imag()};
    };
    auto unpack = [](const ode::Vec<5>& y) {
        return SystemState{{y[0], y[1]}, y[2], complex{y[3], y[4]}};
    };
    const complex b0 = initial.beta.value_or(complex{0.0, 0.0});
    const ode::Vec<5> y0{initial.s.real(), initial.s.imag(), initial.w, b0.real(), b0.imag()};
    const auto bps = p.emitter.drive.breakpoints();
    return run<5>(Model::microscopic, rhs, y0, unpack, grid, opts, bps);
}

std::vector<double> uniform_grid(double t0, double t1, std::size_t samples) {
    if (samples < 2) throw ValidationError("samples", "need at least two samples");
    if (!std::isfinite(t0) || !std::isfinite(t1) || !(t1 > t0)) {
        throw ValidationError("span", "must be finite and positive");
    }
    std::vector<double> g(samples);
    const double dt = (t1 - t0) / static_cast<double>(samples - 1);
    for (std::size_t i = 0; i < samples; ++i) g[i] = t0 + dt * static_cast<double>(i);
    g.back() = t1;
    return g;
}

} // namespace locfield::dynamics
