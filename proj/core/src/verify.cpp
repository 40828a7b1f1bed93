#include "locfield/verify.hpp"

#include "locfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>

namespace locfield::verify {

namespace {

constexpr complex I{0.0, 1.0};

complex emitter_pole(const EmitterParams& e) {
    return I * e.detuning + I * e.ndd_strength - 0.5 * e.decay;
}

struct Line {
    double slope = 0.0;
    double intercept = 0.0;
    double rms = 0.0;
};

Line least_squares(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    Line l;
    l.slope = sxy / sxx;
    l.intercept = my - l.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (l.intercept + l.slope * x[i]);
        ss += r * r;
    }
    l.rms = std::sqrt(ss / n);
    return l;
}

// indices of samples inside the window
std::pair<std::size_t, std::size_t> window_range(std::span<const double> t, FitWindow w) {
    if (!(w.end > w.begin)) throw FitError("fit window must have end > begin");
    const auto lo = std::lower_bound(t.begin(), t.end(), w.begin);
    const auto hi = std::upper_bound(t.begin(), t.end(), w.end);
    const auto first = static_cast<std::size_t>(lo - t.begin());
    const auto last = static_cast<std::size_t>(hi - t.begin());
    if (last <= first || last - first < kMinFitSamples) {
        throw FitError("fit window contains " + std::to_string(last > first ? last - first : 0) +
                       " samples; at least " + std::to_string(kMinFitSamples) + " required");
    }
    return {first, last};
}

} // namespace

EliminationResult eliminate_host(const MicroscopicParams& p) {
    validate(p);
    const complex alpha = p.host_pole();
    const auto& e = p.emitter;

    EliminationResult r;
    r.ell = medium::local_field_factor(p.host).ell;
    r.effective = {e, r.ell};

    const complex drive = 1.0 + p.cross_a * p.dipole_ratio / alpha;
    r.drive_residual = std::abs(drive - r.ell) / std::max(1.0, std::abs(r.ell));

    const complex coherence = p.cross_a * p.cross_b / alpha;
    const complex target = (r.ell - 1.0) * (I * e.ndd_strength - 0.5 * e.decay);
    r.coherence_residual = std::abs(coherence - target) / std::max(1.0, std::abs(target));

    r.residual = std::max(r.drive_residual, r.coherence_residual);
    return r;
}

std::array<std::array<complex, 2>, 2> linearized_matrix(const MicroscopicParams& p) {
    return {{{emitter_pole(p.emitter), -p.cross_a}, {p.cross_b, p.host_pole()}}};
}

EigenPair slow_eigenvalue(const MicroscopicParams& p) {
    const complex a = emitter_pole(p.emitter);
    const complex alpha = p.host_pole();
    const complex coupling = p.cross_a * p.cross_b;
    if (coupling == complex{0.0, 0.0}) {
        return {a, alpha, a == alpha};
    }
    // λ² + bλ + c = 0
    const complex b = -(a + alpha);
    const complex c = a * alpha + coupling;
    const complex disc = b * b - 4.0 * c;
    complex root = std::sqrt(disc);
    // pick the sign that avoids cancellation in -b ∓ sqrt(disc)
    if ((std::conj(b) * root).real() < 0.0) root = -root;
    const complex q = -0.5 * (b + root);
    const complex r1 = q;
    const complex r2 = (q == complex{0.0, 0.0}) ? complex{0.0, 0.0} : c / q;

    EigenPair out;
    out.degenerate = std::abs(disc) < kDegeneracyThreshold;
    if (std::abs(r1 - a) <= std::abs(r2 - a)) {
        out.slow = r1;
        out.fast = r2;
    } else {
        out.slow = r2;
        out.fast = r1;
    }
    return out;
}

complex predicted_slow_eigenvalue(complex ell, const EmitterParams& e) {
    return I * e.detuning + I * ell * e.ndd_strength - 0.5 * ell * e.decay;
}

FitWindow default_window(double rate_guess) {
    if (!std::isfinite(rate_guess) || rate_guess <= 0.0) {
        throw FitError("rate guess must be positive to place the default window");
    }
    return {2.0 / rate_guess, 6.0 / rate_guess};
}

FitResult fit_log_linear(std::span<const double> t, std::span<const double> y, FitWindow window) {
    if (t.size() != y.size()) throw FitError("time and sample counts differ");
    const auto [first, last] = window_range(t, window);
    std::vector<double> logy;
    logy.reserve(last - first);
    for (std::size_t i = first; i < last; ++i) {
        if (!(y[i] > 0.0) || !std::isfinite(y[i])) {
            throw FitError("observable is not strictly positive at t = " + std::to_string(t[i]));
        }
        logy.push_back(std::log(y[i]));
    }
    const Line l = least_squares(t.subspan(first, last - first), logy);
    FitResult r;
    r.rate = -l.slope;
    r.residual = l.rms;
    r.window = window;
    r.samples = last - first;
    return r;
}

FitResult fit_phase(std::span<const double> t, std::span<const complex> z, FitWindow window) {
    if (t.size() != z.size()) throw FitError("time and sample counts differ");
    const auto [first, last] = window_range(t, window);
    constexpr double max_jump = std::numbers::pi / 2.0;

    std::vector<double> phase, amp;
    phase.reserve(last - first);
    amp.reserve(last - first);
    double unwrapped = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        if (!(std::abs(z[i]) > 0.0)) {
            throw FitError("coherence vanishes at t = " + std::to_string(t[i]));
        }
        if (i == first) {
            unwrapped = std::arg(z[i]);
        } else {
            // principal increment between neighbours
            const double step = std::arg(z[i] / z[i - 1]);
            if (std::abs(step) > max_jump) {
                throw FitError("phase advances by more than pi/2 per sample near t = " +
                               std::to_string(t[i]) + "; sampling too coarse to unwrap");
            }
            unwrapped += step;
        }
        phase.push_back(unwrapped);
        amp.push_back(std::log(std::abs(z[i])));
    }
    const auto ts = t.subspan(first, last - first);
    const Line lp = least_squares(ts, phase);
    const Line la = least_squares(ts, amp);
    FitResult r;
    r.frequency = lp.slope;
    r.rate = -la.slope;
    r.residual = lp.rms;
    r.window = window;
    r.samples = last - first;
    return r;
}

FitResult fit_decay(const dynamics::Trajectory& traj, Observable obs, FitWindow window) {
    std::vector<double> y;
    y.reserve(traj.states.size());
    for (const auto& s : traj.states) {
        y.push_back(obs == Observable::coherence ? std::abs(s.s) : s.w + 1.0);
    }
    return fit_log_linear(traj.times, y, window);
}

FitResult fit_frequency(const dynamics::Trajectory& traj, FitWindow window) {
    std::vector<complex> z;
    z.reserve(traj.states.size());
    for (const auto& s : traj.states) z.push_back(s.s);
    return fit_phase(traj.times, z, window);
}

complex slow_mode_beta(const MicroscopicParams& p, complex s) {
    if (p.cross_a == complex{0.0, 0.0}) return {0.0, 0.0};
    // first row of (M - λ)v = 0:  (A - λ)s - C_a β = 0
    const complex lambda = slow_eigenvalue(p).slow;
    return (emitter_pole(p.emitter) - lambda) * s / p.cross_a;
}

dynamics::SystemState slow_mode_state(const MicroscopicParams& p, double amplitude) {
    if (!(amplitude > 0.0) || amplitude >= 0.5) {
        throw ValidationError("amplitude", "weak-excitation amplitude must lie in (0, 0.5)");
    }
    dynamics::SystemState st;
    st.s = amplitude;
    st.w = -std::sqrt(1.0 - 4.0 * amplitude * amplitude);
    st.beta = slow_mode_beta(p, st.s);
    return st;
}

MicroscopicParams scale_host(const MicroscopicParams& base, double kappa) {
    if (!std::isfinite(kappa) || kappa <= 0.0) {
        throw ValidationError("kappa", "must be finite and positive");
    }
    medium::HostSpecies h = base.host;
    h.detuning *= kappa;
    h.ndd_strength *= kappa;
    h.radiative_rate *= kappa;
    return MicroscopicParams::from(base.emitter, h);
}

FitResult simulate_coherence_fit(const MicroscopicParams& p, const ConvergenceOptions& opts) {
    const auto ell = medium::local_field_factor(p.host).ell;
    const complex predicted = predicted_slow_eigenvalue(ell, p.emitter);
    const FitWindow window = default_window(-predicted.real());
    const auto grid = dynamics::uniform_grid(0.0, window.end * 1.02, opts.samples);
    dynamics::MicroscopicParams undriven = p;
    undriven.emitter.drive = {};
    const auto traj = dynamics::integrate(undriven, slow_mode_state(undriven, opts.amplitude), grid,
                                          {.tol = opts.tol});
    return fit_frequency(traj, window);
}

std::vector<ConvergenceRow> convergence_study(const MicroscopicParams& base,
                                              std::span<const double> kappas,
                                              const ConvergenceOptions& opts) {
    if (kappas.empty()) throw ValidationError("kappa", "need at least one separation scale");
    for (std::size_t i = 1; i < kappas.size(); ++i) {
        if (!(kappas[i] > kappas[i - 1])) {
            throw ValidationError("kappa", "separation scales must be strictly increasing");
        }
    }
    std::vector<MicroscopicParams> scaled;
    scaled.reserve(kappas.size());
    for (double k : kappas) {
        auto p = scale_host(base, k);
        if (std::abs(p.host_pole()) > kMaxHostPole) {
            throw ValidationError("kappa", "kappa = " + std::to_string(k) +
                                               " pushes |alpha| above the stiffness cap");
        }
        scaled.push_back(p);
    }

    auto evaluate = [&opts](double kappa, const MicroscopicParams& p) {
        ConvergenceRow row;
        row.kappa = kappa;
        const auto ell = medium::local_field_factor(p.host).ell;
        row.exact = slow_eigenvalue(p).slow;
        row.predicted = predicted_slow_eigenvalue(ell, p.emitter);
        row.eigen_error = std::abs(row.exact - row.predicted);

        const FitResult fit = simulate_coherence_fit(p, opts);
        const double rate_pred = -row.predicted.real();
        const double shift_pred = row.predicted.imag() - p.emitter.detuning;
        row.fitted_rate = fit.rate;
        row.rate_error = std::abs(fit.rate - rate_pred) / rate_pred;
        row.fitted_shift = fit.frequency - p.emitter.detuning;
        row.shift_error = shift_pred == 0.0
                              ? std::abs(row.fitted_shift)
                              : std::abs(row.fitted_shift - shift_pred) / std::abs(shift_pred);
        return row;
    };

    std::vector<ConvergenceRow> rows(kappas.size());
    if (opts.parallel) {
        std::vector<std::future<ConvergenceRow>> jobs;
        jobs.reserve(kappas.size());
        for (std::size_t i = 0; i < kappas.size(); ++i) {
            jobs.push_back(std::async(std::launch::async, evaluate, kappas[i], std::cref(scaled[i])));
        }
        for (std::size_t i = 0; i < jobs.size(); ++i) rows[i] = jobs[i].get();
    } else {
        for (std::size_t i = 0; i < kappas.size(); ++i) rows[i] = evaluate(kappas[i], scaled[i]);
    }
    return rows;
}

} // namespace locfield::verify
