#include "locfield/battery.hpp"

#include "locfield/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <random>
#include <sstream>

namespace locfield::verify {

namespace {

using dynamics::DriveEnvelope;
using dynamics::DriveKind;
using dynamics::SystemState;

CheckResult make_check(std::string name, double value, double threshold, std::string detail = {}) {
    CheckResult c;
    c.name = std::move(name);
    c.value = value;
    c.threshold = threshold;
    c.passed = std::isfinite(value) && value <= threshold;
    c.detail = std::move(detail);
    return c;
}

CheckResult failed_check(std::string name, double threshold, const std::exception& e) {
    CheckResult c;
    c.name = std::move(name);
    c.value = std::numeric_limits<double>::infinity();
    c.threshold = threshold;
    c.detail = std::string("error: ") + e.what();
    return c;
}

MicroscopicParams prepared(MicroscopicParams p, const BatteryOptions& opts) {
    if (opts.corrupt_cross_b) p.cross_b = -p.cross_b;
    return p;
}

CheckResult check_identity(const BatteryOptions& opts) {
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> eps_b(0.0, 50.0), gamma_b(0.0, 20.0),
        delta_b(-200.0, 200.0), eps_a(0.0, 10.0);
    double worst = 0.0;
    int evaluated = 0;
    while (evaluated < 100) {
        dynamics::EmitterParams e;
        e.ndd_strength = eps_a(rng);
        medium::HostSpecies h{delta_b(rng), eps_b(rng), gamma_b(rng)};
        if (h.radiative_rate <= 0.0) continue; // (0, 20]
        auto p = prepared(MicroscopicParams::from(e, h), opts);
        worst = std::max(worst, eliminate_host(p).residual);
        ++evaluated;
    }
    return make_check("elimination_identity", worst, kIdentityThreshold,
                      "max relative residual over 100 random hosts");
}

void check_reference_eigen(const BatteryOptions& opts, std::vector<CheckResult>& out) {
    try {
        const auto p = prepared(reference_scenario(), opts);
        const auto ell = medium::local_field_factor(p.host).ell;
        const complex exact = slow_eigenvalue(p).slow;
        const complex pred = predicted_slow_eigenvalue(ell, p.emitter);
        const FitResult fit = simulate_coherence_fit(p, {.tol = 1e-11});

        std::ostringstream d;
        d.precision(8);
        d << "Gamma_fit=" << fit.rate << " exact=" << -exact.real() << " predicted=" << -pred.real();
        out.push_back(make_check("coherence_decay_vs_exact",
                                 std::abs(fit.rate + exact.real()) / -exact.real(), 1e-3, d.str()));
        out.push_back(make_check("coherence_decay_vs_predicted",
                                 std::abs(fit.rate + pred.real()) / -pred.real(), 5e-3, d.str()));
    } catch (const std::exception& e) {
        out.push_back(failed_check("coherence_decay_vs_exact", 1e-3, e));
        out.push_back(failed_check("coherence_decay_vs_predicted", 5e-3, e));
    }
}

void check_convergence(const BatteryOptions& opts, std::vector<CheckResult>& out,
                       std::vector<ConvergenceRow>& table) {
    const std::vector<double> kappas{1.0, 2.0, 4.0, 8.0};
    try {
        const auto base = reference_scenario();
        table = convergence_study(base, kappas, {.parallel = opts.parallel});
        if (opts.corrupt_cross_b) {
            // recompute the eigen columns with the corrupted couplings
            for (auto& row : table) {
                const auto p = prepared(scale_host(base, row.kappa), opts);
                row.exact = slow_eigenvalue(p).slow;
                row.eigen_error = std::abs(row.exact - row.predicted);
            }
        }
        // halving per doubling within a factor 1.5: ratio in [2/1.5, 2*1.5]
        double worst = 0.0;
        bool decreasing = true;
        std::string ratios;
        for (std::size_t i = 1; i < table.size(); ++i) {
            const double ratio = table[i - 1].eigen_error / table[i].eigen_error;
            const double dev = std::max(4.0 / 3.0 / ratio, ratio / 3.0); // <= 1 when inside
            worst = std::max(worst, dev);
            decreasing = decreasing && table[i].eigen_error < table[i - 1].eigen_error;
            char buf[32];
            std::snprintf(buf, sizeof buf, "%s%.4f", ratios.empty() ? "" : " ", ratio);
            ratios += buf;
        }
        out.push_back(make_check("kappa_halving", decreasing ? worst : INFINITY, 1.0,
                                 "error ratios per doubling " + ratios +
                                     " must lie in [4/3, 3] and decrease strictly"));
        out.push_back(make_check("kappa_largest_rate", table.back().rate_error, 0.02,
                                 "relative error of fitted coherence decay vs Re(ell)gamma_a/2"));
        out.push_back(make_check("kappa_largest_shift", table.back().shift_error, 0.10,
                                 "relative error of fitted shift vs |Im(ell)|gamma_a/2"));
    } catch (const std::exception& e) {
        out.push_back(failed_check("kappa_halving", 1.0, e));
        out.push_back(failed_check("kappa_largest_rate", 0.02, e));
        out.push_back(failed_check("kappa_largest_shift", 0.10, e));
    }
}

CheckResult check_conservation() {
    constexpr double tol = 1e-10;
    try {
        std::vector<DriveEnvelope> drives;
        drives.push_back({DriveKind::constant, {1.0, 0.0}});
        drives.push_back({DriveKind::constant, {0.7, -0.4}});
        drives.push_back({DriveKind::pulse, {2.0, 0.5}, 10.0, 35.0});
        const auto grid = dynamics::uniform_grid(0.0, 100.0, 2001);
        double worst = 0.0;
        for (const auto& drive : drives) {
            dynamics::EffectiveParams p;
            p.emitter = {0.4, 0.8, 0.0, drive};
            p.ell = 1.4;
            SystemState init;
            init.s = {0.2, 0.1};
            init.w = -std::sqrt(1.0 - 4.0 * std::norm(init.s));
            const auto traj = dynamics::integrate(p, init, grid, {.tol = tol});
            const double n0 = init.bloch_norm();
            for (const auto& st : traj.states) worst = std::max(worst, std::abs(st.bloch_norm() - n0));
        }
        return make_check("conservation_undamped", worst, 1e-8,
                          "max |w^2 + 4|s|^2 - initial| over 100/gamma_a");
    } catch (const std::exception& e) {
        return failed_check("conservation_undamped", 1e-8, e);
    }
}

void check_vacuum(std::vector<CheckResult>& out) {
    constexpr double tol = 1e-10;
    try {
        dynamics::EmitterParams e{0.3, 0.0, 1.0, {DriveKind::constant, {0.8, 0.0}}};
        const medium::HostSpecies vacuum_host{10.0, 0.0, 4.0};
        const auto a = dynamics::EffectiveParams::from(e, vacuum_host);
        const auto b = MicroscopicParams::from(e, vacuum_host);
        const auto grid = dynamics::uniform_grid(0.0, 10.0, 201);
        SystemState init_a;
        SystemState init_b;
        init_b.beta = complex{0.0, 0.0};
        const auto ta = dynamics::integrate(a, init_a, grid, {.tol = tol});
        const auto tb = dynamics::integrate(b, init_b, grid, {.tol = tol});
        double worst = 0.0;
        for (std::size_t i = 0; i < ta.states.size(); ++i) {
            worst = std::max({worst, std::abs(ta.states[i].s - tb.states[i].s),
                              std::abs(ta.states[i].w - tb.states[i].w)});
        }
        out.push_back(make_check("vacuum_models_agree", worst, 10.0 * tol,
                                 "max pointwise |A - B| with ell = 1, C_a = 0"));

        e.drive = {};
        const auto free = dynamics::EffectiveParams::from(e, vacuum_host);
        SystemState excited;
        excited.w = 1.0;
        const FitWindow win = default_window(1.0);
        const auto td = dynamics::integrate(free, excited, dynamics::uniform_grid(0.0, win.end, 401),
                                            {.tol = tol});
        const FitResult fit = fit_decay(td, Observable::population, win);
        out.push_back(make_check("vacuum_rate", std::abs(fit.rate - 1.0), 1e-6,
                                 "fitted population decay vs gamma_a"));
    } catch (const std::exception& ex) {
        out.push_back(failed_check("vacuum_models_agree", 10.0 * tol, ex));
        out.push_back(failed_check("vacuum_rate", 1e-6, ex));
    }
}

CheckResult check_population_decay() {
    try {
        dynamics::EffectiveParams p;
        p.ell = 1.4;
        SystemState excited;
        excited.w = 1.0;
        const FitWindow win = default_window(1.4);
        const auto traj =
            dynamics::integrate(p, excited, dynamics::uniform_grid(0.0, win.end, 401), {.tol = 1e-10});
        const FitResult fit = fit_decay(traj, Observable::population, win);
        return make_check("population_decay_re_ell", std::abs(fit.rate - 1.4) / 1.4, 1e-6,
                          "model A, ell = 1.4: fitted Gamma vs Re(ell)gamma_a");
    } catch (const std::exception& e) {
        return failed_check("population_decay_re_ell", 1e-6, e);
    }
}

CheckResult check_rate_comparison() {
    double worst = 0.0;
    bool ordered = true;
    for (int i = 0; i <= 10; ++i) {
        const double n = 1.0 + 0.1 * i;
        const auto r = medium::rate_comparison(n);
        const double ell = (n * n + 2.0) / 3.0;
        worst = std::max({worst, std::abs(r.re_ell - ell), std::abs(r.virtual_cavity - n * ell * ell)});
        if (i > 0) ordered = ordered && r.re_ell < r.virtual_cavity;
    }
    return make_check("rate_comparison", ordered ? worst : INFINITY, 1e-12,
                      "Re(ell) vs n*ell^2 table on n in [1, 2]");
}

} // namespace

bool BatteryReport::all_passed() const noexcept {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

MicroscopicParams reference_scenario() {
    dynamics::EmitterParams e;
    e.detuning = 0.0;
    e.ndd_strength = 0.0;
    e.decay = 1.0;
    return MicroscopicParams::from(e, {10.0, 10.0, 4.0});
}

BatteryReport run_battery(const BatteryOptions& opts) {
    BatteryReport report;
    report.checks.push_back(check_rate_comparison());
    try {
        report.checks.push_back(check_identity(opts));
    } catch (const std::exception& e) {
        report.checks.push_back(failed_check("elimination_identity", kIdentityThreshold, e));
    }
    check_reference_eigen(opts, report.checks);
    check_convergence(opts, report.checks, report.convergence);
    report.checks.push_back(check_conservation());
    check_vacuum(report.checks);
    report.checks.push_back(check_population_decay());
    return report;
}

} // namespace locfield::verify
