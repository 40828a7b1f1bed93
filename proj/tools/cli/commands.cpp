#include "commands.hpp"

#include "locfield/battery.hpp"
#include "locfield/errors.hpp"
#include "locfield/medium.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

namespace locfield::cli {

namespace {

using dynamics::Model;
using verify::Observable;

json pair_json(complex z) { return json::array({z.real(), z.imag()}); }

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string complex_text(complex z) {
    const double im = z.imag();
    return format_number(z.real()) + (im < 0.0 ? " - " : " + ") +
           format_number(std::abs(im)) + "i";
}

double relative_error(double value, double reference) {
    return std::abs(value - reference) / std::max(std::abs(reference), 1e-300);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch == '\n' ? ' ' : ch;
    }
    return q + "\"";
}

// Writes to `path`, or to `fallback` when the path is empty.
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
    if (path.empty()) {
        write(fallback);
        return;
    }
    std::ofstream f(path);
    if (!f) throw ValidationError(path, "cannot write file");
    write(f);
}

std::string suffixed(const std::string& path, const char* tag) {
    if (path.empty()) return path;
    const std::filesystem::path p(path);
    std::filesystem::path out = p.parent_path() / (p.stem().string() + "_" + tag + p.extension().string());
    return out.string();
}

const char* observable_name(Observable o) {
    return o == Observable::coherence ? "coherence" : "population";
}

std::optional<Observable> resolve_observable(const ScenarioConfig& c) {
    switch (c.fit.observable) {
    case FitObservable::coherence: return Observable::coherence;
    case FitObservable::population: return Observable::population;
    case FitObservable::none: return std::nullopt;
    case FitObservable::automatic: break;
    }
    if (c.initial.w >= 0.0) return Observable::population;
    if (std::abs(c.initial.s) > 0.0) return Observable::coherence;
    return std::nullopt;
}

} // namespace

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

void write_trajectory_csv(std::ostream& out, const dynamics::Trajectory& traj) {
    out << kTrajectoryHeader << '\n';
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const auto& st = traj.states[i];
        out << format_number(traj.times[i]) << ',' << format_number(st.s.real()) << ','
            << format_number(st.s.imag()) << ',' << format_number(st.w) << ',';
        if (traj.model == Model::microscopic && st.beta) {
            out << format_number(st.beta->real()) << ',' << format_number(st.beta->imag());
        } else {
            out << ',';
        }
        out << '\n';
    }
}

json RunSummary::to_json() const {
    json j;
    j["model"] = dynamics::model_name(model);
    j["ell"] = pair_json(ell);
    j["observable"] = observable ? json(observable_name(*observable)) : json(nullptr);
    j["predicted_rate"] = predicted_rate;
    j["exact_rate"] = optional_json(exact_rate);
    j["predicted_frequency"] = optional_json(predicted_frequency);
    j["exact_frequency"] = optional_json(exact_frequency);
    if (fit) {
        json f;
        f["rate"] = fit->rate;
        f["window"] = json::array({fit->window.begin, fit->window.end});
        f["samples"] = fit->samples;
        f["residual"] = fit->residual;
        f["rate_error_vs_predicted"] = relative_error(fit->rate, predicted_rate);
        f["rate_error_vs_exact"] =
            exact_rate ? json(relative_error(fit->rate, *exact_rate)) : json(nullptr);
        if (observable == Observable::coherence) {
            f["frequency"] = fit->frequency;
            f["frequency_error_vs_predicted"] = fit->frequency - predicted_frequency.value_or(0.0);
            f["frequency_error_vs_exact"] =
                exact_frequency ? json(fit->frequency - *exact_frequency) : json(nullptr);
        }
        j["fit"] = f;
    } else {
        j["fit"] = nullptr;
    }
    j["fit_error"] = fit_error.empty() ? json(nullptr) : json(fit_error);
    j["integrator"] = {{"steps", stats.steps},
                       {"rejected", stats.rejected},
                       {"rhs_evals", stats.rhs_evals},
                       {"tol", stats.tol},
                       {"max_bloch_norm", stats.max_bloch_norm},
                       {"bloch_violation", stats.bloch_violation}};
    return j;
}

SimulationRun run_scenario(const ScenarioConfig& c, Model model) {
    validate(c);
    const auto grid = dynamics::uniform_grid(0.0, c.time.span, c.time.samples);
    const dynamics::IntegrateOptions opts{.tol = c.time.tolerance, .max_steps = c.time.max_steps};

    SimulationRun run;
    RunSummary& sum = run.summary;
    sum.model = model;
    sum.ell = medium::local_field_factor(c.host).ell;
    sum.observable = resolve_observable(c);

    dynamics::SystemState init;
    init.s = c.initial.s;
    init.w = c.initial.w;
    std::optional<dynamics::MicroscopicParams> micro;
    if (model == Model::effective) {
        run.trajectory = dynamics::integrate(dynamics::EffectiveParams::from(c.emitter, c.host), init,
                                             grid, opts);
    } else {
        micro = dynamics::MicroscopicParams::from(c.emitter, c.host);
        init.beta = c.initial.beta_mode == BetaMode::slow_mode
                        ? verify::slow_mode_beta(*micro, init.s)
                        : c.initial.beta;
        run.trajectory = dynamics::integrate(*micro, init, grid, opts);
    }
    sum.stats = run.trajectory.stats;

    if (!sum.observable) return run;

    if (*sum.observable == Observable::population) {
        sum.predicted_rate = model == Model::effective ? sum.ell.real() * c.emitter.decay
                                                       : c.emitter.decay;
    } else {
        const complex pred = verify::predicted_slow_eigenvalue(sum.ell, c.emitter);
        sum.predicted_rate = -pred.real();
        sum.predicted_frequency = pred.imag();
        if (micro) {
            const complex exact = verify::slow_eigenvalue(*micro).slow;
            sum.exact_rate = -exact.real();
            sum.exact_frequency = exact.imag();
        }
    }

    try {
        verify::FitWindow window = c.fit.window ? *c.fit.window : verify::default_window(sum.predicted_rate);
        window.end = std::min(window.end, c.time.span);
        if (*sum.observable == Observable::population) {
            sum.fit = verify::fit_decay(run.trajectory, Observable::population, window);
        } else {
            sum.fit = verify::fit_frequency(run.trajectory, window);
        }
    } catch (const FitError& e) {
        sum.fit_error = e.what();
    }
    return run;
}

int cmd_factor(const FactorArgs& a, std::ostream& out, std::ostream& err) {
    try {
        const medium::HostSpecies host{a.delta_b, a.eps_b, a.gamma_b};
        const auto f = medium::local_field_factor(host);
        const double shift = medium::level_shift(f.ell, a.gamma_a);
        const double signed_shift = medium::signed_level_shift(f.ell, a.gamma_a);
        if (a.json) {
            json j;
            j["host"] = {{"detuning", host.detuning},
                         {"ndd_strength", host.ndd_strength},
                         {"radiative_rate", host.radiative_rate}};
            j["gamma_a"] = a.gamma_a;
            j["ell"] = pair_json(f.ell);
            j["index"] = pair_json(f.index);
            j["re_ell"] = f.ell.real();
            j["im_ell"] = f.ell.imag();
            j["level_shift"] = shift;
            j["signed_level_shift"] = signed_shift;
            out << j.dump(2) << '\n';
        } else {
            out << "ell          " << complex_text(f.ell) << '\n'
                << "n            " << complex_text(f.index) << '\n'
                << "Re(ell)      " << format_number(f.ell.real()) << '\n'
                << "Im(ell)      " << format_number(f.ell.imag()) << '\n'
                << "level shift  " << format_number(shift) << "  (signed "
                << format_number(signed_shift) << ", gamma_a = " << format_number(a.gamma_a)
                << ")\n";
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
    } catch (const SingularHostError& e) {
        err << "error: host: " << e.what() << '\n';
    }
    return kExitValidation;
}

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
    try {
        std::vector<double> ns = a.n;
        if (ns.empty()) {
            if (!(a.n_step > 0.0) || !(a.n_max >= a.n_min) || !std::isfinite(a.n_max)) {
                throw ValidationError("n-step", "need n-step > 0 and n-max >= n-min");
            }
            const auto count =
                static_cast<std::size_t>(std::floor((a.n_max - a.n_min) / a.n_step + 1e-9)) + 1;
            for (std::size_t i = 0; i < count; ++i) {
                ns.push_back(a.n_min + static_cast<double>(i) * a.n_step);
            }
        }
        std::vector<medium::RateComparison> rows;
        rows.reserve(ns.size());
        for (double n : ns) rows.push_back(medium::rate_comparison(n));
        emit(a.out_path, out, [&](std::ostream& o) {
            o << kCompareHeader << '\n';
            for (const auto& r : rows) {
                o << format_number(r.n) << ',' << format_number(r.re_ell) << ','
                  << format_number(r.virtual_cavity) << ',' << format_number(r.onsager) << '\n';
            }
        });
        return kExitOk;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
    ScenarioConfig c;
    try {
        c = load_scenario(a.config);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const SingularHostError& e) {
        err << "error: host: " << e.what() << '\n';
        return kExitValidation;
    }
    if (!a.csv.empty()) c.output.csv = a.csv;
    if (!a.summary.empty()) c.output.summary = a.summary;

    std::vector<Model> models;
    if (c.model != ModelSelect::B) models.push_back(Model::effective);
    if (c.model != ModelSelect::A) models.push_back(Model::microscopic);

    json runs = json::array();
    std::vector<RunSummary> summaries;
    for (Model m : models) {
        const std::string csv_path =
            c.model == ModelSelect::both ? suffixed(c.output.csv, dynamics::model_name(m))
                                         : c.output.csv;
        try {
            const SimulationRun run = run_scenario(c, m);
            if (!csv_path.empty()) {
                emit(csv_path, out, [&](std::ostream& o) { write_trajectory_csv(o, run.trajectory); });
            }
            runs.push_back(run.summary.to_json());
            summaries.push_back(run.summary);
        } catch (const dynamics::IntegrationError& e) {
            if (!csv_path.empty()) {
                emit(csv_path, out, [&](std::ostream& o) {
                    write_trajectory_csv(o, e.partial());
                    o << "# integration failed: " << e.what() << '\n';
                });
            }
            err << "error: integration failed: " << e.what()
                << '\n';
            return kExitIntegration;
        } catch (const ValidationError& e) {
            err << "error: " << e.what() << '\n';
            return kExitValidation;
        }
    }

    const json summary = {{"runs", runs}};
    try {
        if (!c.output.summary.empty()) {
            emit(c.output.summary, out, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }

    if (a.json) {
        out << summary.dump(2) << '\n';
        return kExitOk;
    }
    for (const auto& s : summaries) {
        out << "model " << dynamics::model_name(s.model) << "  ell = " << complex_text(s.ell) << '\n';
        if (!s.observable) {
            out << "  no fit (observable none)\n";
        } else if (!s.fit) {
            out << "  " << observable_name(*s.observable) << " fit failed: " << s.fit_error << '\n';
        } else {
            out << "  " << observable_name(*s.observable) << " fit on ["
                << format_number(s.fit->window.begin) << ", " << format_number(s.fit->window.end)
                << "], " << s.fit->samples << " samples\n";
            out << "  Gamma_fit      " << format_number(s.fit->rate) << '\n';
            out << "  predicted      " << format_number(s.predicted_rate) << "  rel. error "
                << format_number(relative_error(s.fit->rate, s.predicted_rate)) << '\n';
            if (s.exact_rate) {
                out << "  exact          " << format_number(*s.exact_rate) << "  rel. error "
                    << format_number(relative_error(s.fit->rate, *s.exact_rate)) << '\n';
            }
            if (*s.observable == Observable::coherence) {
                out << "  omega_fit      " << format_number(s.fit->frequency) << '\n';
                out << "  omega_pred     " << format_number(s.predicted_frequency.value_or(0.0)) << '\n';
                if (s.exact_frequency) {
                    out << "  omega_exact    " << format_number(*s.exact_frequency) << '\n';
                }
            }
        }
        out << "  steps " << s.stats.steps << ", rejected " << s.stats.rejected << ", max norm "
            << format_number(s.stats.max_bloch_norm) << '\n';
    }
    return kExitOk;
}

int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err) {
    verify::BatteryOptions opts;
    if (a.seed) opts.seed = *a.seed;
    opts.parallel = a.parallel;
    opts.corrupt_cross_b = a.corrupt_cross_b;

    verify::BatteryReport report;
    try {
        report = verify::run_battery(opts);
    } catch (const dynamics::IntegrationError& e) {
        err << "error: integration failed during verification: " << e.what() << '\n';
        return kExitIntegration;
    }

    if (a.json) {
        json checks = json::array();
        for (const auto& c : report.checks) {
            checks.push_back({{"name", c.name},
                              {"passed", c.passed},
                              {"value", c.value},
                              {"threshold", c.threshold},
                              {"detail", c.detail}});
        }
        json table = json::array();
        for (const auto& r : report.convergence) {
            table.push_back({{"kappa", r.kappa},
                             {"exact", pair_json(r.exact)},
                             {"predicted", pair_json(r.predicted)},
                             {"eigen_error", r.eigen_error},
                             {"fitted_rate", r.fitted_rate},
                             {"rate_error", r.rate_error},
                             {"fitted_shift", r.fitted_shift},
                             {"shift_error", r.shift_error}});
        }
        out << json{{"passed", report.all_passed()}, {"checks", checks}, {"convergence", table}}.dump(2)
            << '\n';
    } else {
        for (const auto& c : report.checks) {
            char line[160];
            std::snprintf(line, sizeof line, "%-4s %-30s %-12.4g <= %-10.3g ", c.passed ? "PASS" : "FAIL",
                          c.name.c_str(), c.value, c.threshold);
            out << line << c.detail << '\n';
        }
        if (!report.convergence.empty()) {
            out << "\nkappa  |lambda_exact - lambda_pred|  Gamma_fit  rate_err  shift_fit  shift_err\n";
            for (const auto& r : report.convergence) {
                char line[160];
                std::snprintf(line, sizeof line, "%5g  %27.6e  %9.6f  %8.2e  %9.6f  %9.2e\n", r.kappa,
                              r.eigen_error, r.fitted_rate, r.rate_error, r.fitted_shift, r.shift_error);
                out << line;
            }
        }
    }
    if (!report.all_passed()) {
        for (const auto& c : report.checks) {
            if (!c.passed) err << "check failed: " << c.name << ": " << c.detail << '\n';
        }
        return kExitVerification;
    }
    return kExitOk;
}

namespace {

struct SweepRow {
    double value = 0.0;
    std::optional<complex> ell;
    std::optional<double> rate;
    std::optional<double> shift;
    std::string error;
};

bool wants(const SweepSpec& spec, SweepReduction r) {
    return std::find(spec.reductions.begin(), spec.reductions.end(), r) != spec.reductions.end();
}

SweepRow evaluate_point(const SweepSpec& spec, std::size_t i) {
    SweepRow row;
    row.value = spec.values[i];
    try {
        const ScenarioConfig c = scenario_from_json(sweep_point(spec, i));
        const complex ell = medium::local_field_factor(c.host).ell;
        if (wants(spec, SweepReduction::ell)) row.ell = ell;
        if (wants(spec, SweepReduction::shift)) row.shift = medium::level_shift(ell, c.emitter.decay);
        if (wants(spec, SweepReduction::rate)) {
            const Model m = c.model == ModelSelect::B ? Model::microscopic : Model::effective;
            const SimulationRun run = run_scenario(c, m);
            if (run.summary.fit) {
                row.rate = run.summary.fit->rate;
            } else if (!run.summary.fit_error.empty()) {
                row.error = "fit: " + run.summary.fit_error;
            } else {
                row.error = "fit: no observable to fit";
            }
        }
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

} // namespace

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    try {
        spec = load_sweep(a.spec);
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    if (a.jobs == 0) {
        err << "error: jobs: must be >= 1\n";
        return kExitValidation;
    }

    std::vector<SweepRow> rows(spec.values.size());
    const unsigned workers =
        std::min<unsigned>(a.jobs, static_cast<unsigned>(std::max<std::size_t>(1, rows.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = evaluate_point(spec, i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < rows.size(); i = next++) rows[i] = evaluate_point(spec, i);
            });
        }
        for (auto& t : pool) t.join();
    }

    auto cell = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    try {
        emit(a.out_path, out, [&](std::ostream& o) {
            o << kSweepHeader << '\n';
            for (const auto& r : rows) {
                o << format_number(r.value) << ','
                  << cell(r.ell ? std::optional(r.ell->real()) : std::nullopt) << ','
                  << cell(r.ell ? std::optional(r.ell->imag()) : std::nullopt) << ',' << cell(r.rate)
                  << ',' << cell(r.shift) << ',' << csv_field(r.error) << '\n';
            }
        });
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
    if (failed > 0) err << failed << " of " << rows.size() << " sweep points reported errors\n";
    return kExitOk;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Local-field corrected spontaneous emission: factors, dynamics and checks", "locfield"};
    app.require_subcommand(1);

    FactorArgs fa;
    auto* factor = app.add_subcommand("factor", "Local-field factor, index and level shift of a host");
    factor->add_option("--delta-b", fa.delta_b, "host detuning (units of gamma_a)");
    factor->add_option("--eps-b", fa.eps_b, "host NDD strength");
    factor->add_option("--gamma-b", fa.gamma_b, "host radiative rate");
    factor->add_option("--gamma-a", fa.gamma_a, "emitter decay rate")->capture_default_str();
    factor->add_flag("--json", fa.json, "machine-readable output");

    CompareArgs ca;
    auto* compare = app.add_subcommand("compare", "Rate prescriptions over a grid of real indices");
    compare->add_option("--n", ca.n, "explicit index values (repeatable)");
    compare->add_option("--n-min", ca.n_min)->capture_default_str();
    compare->add_option("--n-max", ca.n_max)->capture_default_str();
    compare->add_option("--n-step", ca.n_step)->capture_default_str();
    compare->add_option("--out", ca.out_path, "CSV path (default stdout)");

    SimulateArgs sa;
    auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and fit its decay");
    simulate->add_option("config", sa.config, "scenario JSON file")->required();
    simulate->add_option("--csv", sa.csv, "trajectory CSV path (overrides output.csv)");
    simulate->add_option("--summary", sa.summary, "summary JSON path (overrides output.summary)");
    simulate->add_flag("--json", sa.json, "print the summary as JSON");

    VerifyArgs va;
    std::string fault;
    std::uint64_t seed = 0;
    auto* verify_cmd = app.add_subcommand("verify", "Run the built-in verification battery");
    verify_cmd->add_flag("--json", va.json, "machine-readable report");
    verify_cmd->add_flag("--parallel", va.parallel, "evaluate the convergence study concurrently");
    verify_cmd->add_option("--inject-fault", fault, "deliberately break a coupling")
        ->check(CLI::IsMember({"cb-sign"}));
    auto* seed_opt = verify_cmd->add_option("--seed", seed, "seed of the randomized identity battery");

    SweepArgs wa;
    auto* sweep = app.add_subcommand("sweep", "Evaluate a scenario over a list of parameter values");
    sweep->add_option("spec", wa.spec, "sweep JSON file")->required();
    sweep->add_option("--out", wa.out_path, "CSV path (default stdout)");
    sweep->add_option("--jobs", wa.jobs, "worker threads")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
    }

    if (*factor) return cmd_factor(fa, out, err);
    if (*compare) return cmd_compare(ca, out, err);
    if (*simulate) return cmd_simulate(sa, out, err);
    if (*verify_cmd) {
        va.corrupt_cross_b = fault == "cb-sign";
        if (seed_opt->count() > 0) va.seed = seed;
        return cmd_verify(va, out, err);
    }
    return cmd_sweep(wa, out, err);
}

} // namespace locfield::cli
