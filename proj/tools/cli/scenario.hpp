// scenario.hpp: JSON scenario and sweep files for the locfield tool.
//
// Scenario schema (all sections optional unless noted; unknown keys are
// rejected; rates and times in units of γ_a):
//
//   {
//     "model":   "A" | "B" | "both",
//     "emitter": {"detuning": 0, "ndd_strength": 0, "decay": 1},
//     "host":    {"detuning": 0, "ndd_strength": 0, "radiative_rate": 0},
//     "gaussian": {                       // replaces emitter rates and host
//       "angular_frequency": 2.5e15,      // rad/s, shared carrier
//       "emitter": {"number_density": ..., "dipole_moment": ..., "detuning": ...},
//       "host":    {"number_density": ..., "dipole_moment": ..., "detuning": ...}
//     },
//     "drive":   {"kind": "off"|"constant"|"pulse", "rabi": [re, im], "t_on": 0, "t_off": 0},
//     "initial": {"s": [re, im], "w": -1, "beta": [re, im], "beta_mode": "explicit"|"slow_mode"},
//     "time":    {"span": 10, "samples": 401, "tolerance": 1e-10, "max_steps": 20000000},
//     "fit":     {"observable": "auto"|"coherence"|"population"|"none", "window": [t0, t1]},
//     "output":  {"csv": "", "summary": ""}
//   }

#pragma once

#include "locfield/dynamics.hpp"
#include "locfield/medium.hpp"
#include "locfield/verify.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace locfield::cli {

using complex = std::complex<double>;
using json = nlohmann::json;

enum class ModelSelect { A, B, both };
enum class BetaMode { explicit_value, slow_mode };
enum class FitObservable { automatic, coherence, population, none };

struct GaussianSpecies {
    double number_density = 0.0; // cm^-3
    double dipole_moment = 0.0;  // statC cm
    double detuning = 0.0;       // rad/s, ω_p - ω_species

    bool operator==(const GaussianSpecies&) const = default;
};

struct GaussianSection {
    double angular_frequency = 0.0;
    GaussianSpecies emitter;
    GaussianSpecies host;

    bool operator==(const GaussianSection&) const = default;
};

struct InitialSection {
    complex s{0.0, 0.0};
    double w = -1.0;
    complex beta{0.0, 0.0};
    BetaMode beta_mode = BetaMode::explicit_value;

    bool operator==(const InitialSection&) const = default;
};

struct TimeSection {
    double span = 10.0;
    std::size_t samples = 401;
    double tolerance = 1e-10;
    std::size_t max_steps = 20'000'000; // integrator budget; exhausting it is a failure

    bool operator==(const TimeSection&) const = default;
};

struct FitSection {
    FitObservable observable = FitObservable::automatic;
    std::optional<verify::FitWindow> window;

    bool operator==(const FitSection& o) const {
        return observable == o.observable && window.has_value() == o.window.has_value() &&
               (!window || (window->begin == o.window->begin && window->end == o.window->end));
    }
};

struct OutputSection {
    std::string csv;
    std::string summary;

    bool operator==(const OutputSection&) const = default;
};

struct ScenarioConfig {
    ModelSelect model = ModelSelect::A;
    dynamics::EmitterParams emitter; // drive lives here
    medium::HostSpecies host;
    std::optional<GaussianSection> gaussian;
    InitialSection initial;
    TimeSection time;
    FitSection fit;
    OutputSection output;

    bool operator==(const ScenarioConfig& o) const;
};

// Parses and validates; throws ValidationError naming the offending key.
ScenarioConfig scenario_from_json(const json& j);
json scenario_to_json(const ScenarioConfig& c);

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& c, const std::string& path);

// Re-checks every module invariant the scenario touches.
void validate(const ScenarioConfig& c);

enum class SweepReduction { ell, rate, shift };

struct SweepSpec {
    json base;                   // full scenario document
    std::string parameter;       // dotted path to a numeric leaf, e.g. "host.ndd_strength"
    std::vector<double> values;
    std::vector<json> overrides; // empty, or one merge patch per value
    std::vector<SweepReduction> reductions{SweepReduction::ell, SweepReduction::rate,
                                           SweepReduction::shift};
};

// `base_dir` resolves a relative "base_file" entry.
SweepSpec sweep_from_json(const json& j, const std::string& base_dir = ".");
SweepSpec load_sweep(const std::string& path);

// Scenario document for sweep point i: base, parameter set, override merged.
json sweep_point(const SweepSpec& spec, std::size_t i);

json read_json_file(const std::string& path);

} // namespace locfield::cli
