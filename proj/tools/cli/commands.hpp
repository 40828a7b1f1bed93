// commands.hpp: the locfield subcommands, callable in-process.

#pragma once

#include "scenario.hpp"

#include "locfield/dynamics.hpp"
#include "locfield/verify.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace locfield::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitIntegration = 3,
    kExitVerification = 4,
};

// 12 significant digits, shortest form ("%.12g").
std::string format_number(double v);

inline constexpr const char* kTrajectoryHeader = "t,re_s,im_s,w,re_beta,im_beta";
inline constexpr const char* kCompareHeader = "n,re_ell,virtual_cavity,onsager";
inline constexpr const char* kSweepHeader = "value,re_ell,im_ell,gamma_fit,shift,error";

// Header plus one row per sample; β columns left empty for model A.
void write_trajectory_csv(std::ostream& out, const dynamics::Trajectory& traj);

struct RunSummary {
    dynamics::Model model = dynamics::Model::effective;
    complex ell{1.0, 0.0};
    std::optional<verify::Observable> observable;
    std::optional<verify::FitResult> fit;
    std::string fit_error;
    double predicted_rate = 0.0;
    std::optional<double> exact_rate;      // model B coherence: -Re(λ_slow)
    std::optional<double> predicted_frequency;
    std::optional<double> exact_frequency; // model B coherence: Im(λ_slow)
    dynamics::IntegratorStats stats;

    nlohmann::json to_json() const;
};

struct SimulationRun {
    dynamics::Trajectory trajectory;
    RunSummary summary;
};

// Integrates one model of the scenario and fits the configured observable.
// Throws dynamics::IntegrationError on integrator failure.
SimulationRun run_scenario(const ScenarioConfig& c, dynamics::Model model);

struct FactorArgs {
    double delta_b = 0.0;
    double eps_b = 0.0;
    double gamma_b = 0.0;
    double gamma_a = 1.0;
    bool json = false;
};
int cmd_factor(const FactorArgs& a, std::ostream& out, std::ostream& err);

struct CompareArgs {
    std::vector<double> n;      // explicit list, else the range below
    double n_min = 1.0;
    double n_max = 2.0;
    double n_step = 0.1;
    std::string out_path;
};
int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err);

struct SimulateArgs {
    std::string config;
    std::string csv;     // overrides output.csv
    std::string summary; // overrides output.summary
    bool json = false;
};
int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err);

struct VerifyArgs {
    bool json = false;
    bool parallel = false;
    bool corrupt_cross_b = false;
    std::optional<std::uint64_t> seed;
};
int cmd_verify(const VerifyArgs& a, std::ostream& out, std::ostream& err);

struct SweepArgs {
    std::string spec;
    std::string out_path;
    unsigned jobs = 1;
};
int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err);

// Full command-line entry point (argv[0] is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace locfield::cli
