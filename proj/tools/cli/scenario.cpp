#include "scenario.hpp"

#include "locfield/errors.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

namespace locfield::cli {

namespace {

// Walks one JSON object, remembering which keys were read so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(where(""), "expected an object");
    }

    bool has(const std::string& key) const { return j_.contains(key); }

    double number(const std::string& key, double fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number()) throw ValidationError(where(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) throw ValidationError(where(key), "must be finite");
        return d;
    }

    std::size_t count(const std::string& key, std::size_t fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_number_unsigned()) {
            throw ValidationError(where(key), "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

    complex pair(const std::string& key, complex fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ValidationError(where(key), "expected [re, im]");
        }
        return {v[0].get<double>(), v[1].get<double>()};
    }

    std::string text(const std::string& key, const std::string& fallback) {
        seen_.insert(key);
        if (!j_.contains(key)) return fallback;
        const auto& v = j_.at(key);
        if (!v.is_string()) throw ValidationError(where(key), "expected a string");
        return v.get<std::string>();
    }

    const json* child(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key) ? &j_.at(key) : nullptr;
    }

    std::string where(const std::string& key) const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

    void finish() const {
        for (const auto& [k, _] : j_.items()) {
            if (!seen_.count(k)) throw ValidationError(where(k), "unknown key");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json pair_json(complex z) { return json::array({z.real(), z.imag()}); }

const char* model_text(ModelSelect m) {
    switch (m) {
    case ModelSelect::A: return "A";
    case ModelSelect::B: return "B";
    case ModelSelect::both: return "both";
    }
    return "A";
}

const char* drive_text(dynamics::DriveKind k) {
    switch (k) {
    case dynamics::DriveKind::off: return "off";
    case dynamics::DriveKind::constant: return "constant";
    case dynamics::DriveKind::pulse: return "pulse";
    }
    return "off";
}

const char* observable_text(FitObservable o) {
    switch (o) {
    case FitObservable::automatic: return "auto";
    case FitObservable::coherence: return "coherence";
    case FitObservable::population: return "population";
    case FitObservable::none: return "none";
    }
    return "auto";
}

GaussianSpecies read_gaussian_species(const json& j, const std::string& path) {
    Section s(j, path);
    GaussianSpecies g;
    g.number_density = s.number("number_density", 0.0);
    g.dipole_moment = s.number("dipole_moment", 0.0);
    g.detuning = s.number("detuning", 0.0);
    s.finish();
    return g;
}

json gaussian_species_json(const GaussianSpecies& g) {
    return {{"number_density", g.number_density},
            {"dipole_moment", g.dipole_moment},
            {"detuning", g.detuning}};
}

void apply_gaussian(ScenarioConfig& c) {
    const auto& g = *c.gaussian;
    const medium::GaussianInputs em{g.emitter.number_density, g.emitter.dipole_moment,
                                    g.angular_frequency};
    const medium::GaussianInputs host{g.host.number_density, g.host.dipole_moment,
                                      g.angular_frequency};
    const auto scaled = medium::to_scaled(em, host, g.host.detuning);
    c.emitter.decay = 1.0;
    c.emitter.ndd_strength = scaled.emitter_ndd;
    c.emitter.detuning = g.emitter.detuning / scaled.gamma_a_rad_s;
    c.host = scaled.host;
}

} // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
    return model == o.model && emitter == o.emitter && host == o.host && gaussian == o.gaussian &&
           initial == o.initial && time == o.time && fit == o.fit && output == o.output;
}

ScenarioConfig scenario_from_json(const json& j) {
    Section root(j, "");
    ScenarioConfig c;

    const std::string model = root.text("model", "A");
    if (model == "A") c.model = ModelSelect::A;
    else if (model == "B") c.model = ModelSelect::B;
    else if (model == "both") c.model = ModelSelect::both;
    else throw ValidationError("model", "expected \"A\", \"B\" or \"both\"");

    if (const json* g = root.child("gaussian")) {
        if (root.has("host")) throw ValidationError("host", "not allowed together with \"gaussian\"");
        Section gs(*g, "gaussian");
        GaussianSection sec;
        sec.angular_frequency = gs.number("angular_frequency", 0.0);
        if (const json* e = gs.child("emitter")) sec.emitter = read_gaussian_species(*e, "gaussian.emitter");
        if (const json* h = gs.child("host")) sec.host = read_gaussian_species(*h, "gaussian.host");
        gs.finish();
        c.gaussian = sec;
    }

    if (const json* e = root.child("emitter")) {
        if (c.gaussian) throw ValidationError("emitter", "not allowed together with \"gaussian\"");
        Section es(*e, "emitter");
        c.emitter.detuning = es.number("detuning", c.emitter.detuning);
        c.emitter.ndd_strength = es.number("ndd_strength", c.emitter.ndd_strength);
        c.emitter.decay = es.number("decay", c.emitter.decay);
        es.finish();
    }
    if (const json* h = root.child("host")) {
        Section hs(*h, "host");
        c.host.detuning = hs.number("detuning", 0.0);
        c.host.ndd_strength = hs.number("ndd_strength", 0.0);
        c.host.radiative_rate = hs.number("radiative_rate", 0.0);
        hs.finish();
    }
    if (c.gaussian) apply_gaussian(c);

    if (const json* d = root.child("drive")) {
        Section ds(*d, "drive");
        const std::string kind = ds.text("kind", "off");
        if (kind == "off") c.emitter.drive.kind = dynamics::DriveKind::off;
        else if (kind == "constant") c.emitter.drive.kind = dynamics::DriveKind::constant;
        else if (kind == "pulse") c.emitter.drive.kind = dynamics::DriveKind::pulse;
        else throw ValidationError("drive.kind", "expected \"off\", \"constant\" or \"pulse\"");
        c.emitter.drive.rabi = ds.pair("rabi", {0.0, 0.0});
        c.emitter.drive.t_on = ds.number("t_on", 0.0);
        c.emitter.drive.t_off = ds.number("t_off", 0.0);
        ds.finish();
    }

    if (const json* i = root.child("initial")) {
        Section is(*i, "initial");
        c.initial.s = is.pair("s", c.initial.s);
        c.initial.w = is.number("w", c.initial.w);
        c.initial.beta = is.pair("beta", c.initial.beta);
        const std::string mode = is.text("beta_mode", "explicit");
        if (mode == "explicit") c.initial.beta_mode = BetaMode::explicit_value;
        else if (mode == "slow_mode") c.initial.beta_mode = BetaMode::slow_mode;
        else throw ValidationError("initial.beta_mode", "expected \"explicit\" or \"slow_mode\"");
        is.finish();
    }

    if (const json* t = root.child("time")) {
        Section ts(*t, "time");
        c.time.span = ts.number("span", c.time.span);
        c.time.samples = ts.count("samples", c.time.samples);
        c.time.tolerance = ts.number("tolerance", c.time.tolerance);
        c.time.max_steps = ts.count("max_steps", c.time.max_steps);
        ts.finish();
    }

    if (const json* f = root.child("fit")) {
        Section fs(*f, "fit");
        const std::string obs = fs.text("observable", "auto");
        if (obs == "auto") c.fit.observable = FitObservable::automatic;
        else if (obs == "coherence") c.fit.observable = FitObservable::coherence;
        else if (obs == "population") c.fit.observable = FitObservable::population;
        else if (obs == "none") c.fit.observable = FitObservable::none;
        else throw ValidationError("fit.observable", "expected auto|coherence|population|none");
        if (const json* w = fs.child("window"); w && !w->is_null()) {
            const complex win = Section(json{{"window", *w}}, "fit").pair("window", {});
            c.fit.window = verify::FitWindow{win.real(), win.imag()};
        }
        fs.finish();
    }

    if (const json* o = root.child("output")) {
        Section os(*o, "output");
        c.output.csv = os.text("csv", "");
        c.output.summary = os.text("summary", "");
        os.finish();
    }

    root.finish();
    validate(c);
    return c;
}

json scenario_to_json(const ScenarioConfig& c) {
    json j;
    j["model"] = model_text(c.model);
    if (c.gaussian) {
        j["gaussian"] = {{"angular_frequency", c.gaussian->angular_frequency},
                         {"emitter", gaussian_species_json(c.gaussian->emitter)},
                         {"host", gaussian_species_json(c.gaussian->host)}};
    } else {
        j["emitter"] = {{"detuning", c.emitter.detuning},
                        {"ndd_strength", c.emitter.ndd_strength},
                        {"decay", c.emitter.decay}};
        j["host"] = {{"detuning", c.host.detuning},
                     {"ndd_strength", c.host.ndd_strength},
                     {"radiative_rate", c.host.radiative_rate}};
    }
    j["drive"] = {{"kind", drive_text(c.emitter.drive.kind)},
                  {"rabi", pair_json(c.emitter.drive.rabi)},
                  {"t_on", c.emitter.drive.t_on},
                  {"t_off", c.emitter.drive.t_off}};
    j["initial"] = {{"s", pair_json(c.initial.s)},
                    {"w", c.initial.w},
                    {"beta", pair_json(c.initial.beta)},
                    {"beta_mode", c.initial.beta_mode == BetaMode::slow_mode ? "slow_mode" : "explicit"}};
    j["time"] = {{"span", c.time.span}, {"samples", c.time.samples}, {"tolerance", c.time.tolerance},
                 {"max_steps", c.time.max_steps}};
    j["fit"] = {{"observable", observable_text(c.fit.observable)}};
    j["fit"]["window"] = c.fit.window ? json::array({c.fit.window->begin, c.fit.window->end}) : json();
    j["output"] = {{"csv", c.output.csv}, {"summary", c.output.summary}};
    return j;
}

void validate(const ScenarioConfig& c) {
    if (c.model != ModelSelect::B) {
        dynamics::validate(dynamics::EffectiveParams::from(c.emitter, c.host));
    }
    if (c.model != ModelSelect::A) {
        dynamics::MicroscopicParams::from(c.emitter, c.host);
    } else {
        medium::validate(c.host);
    }

    if (!(c.time.span > 0.0)) throw ValidationError("time.span", "must be positive");
    if (c.time.samples < 2) throw ValidationError("time.samples", "need at least two samples");
    if (c.time.max_steps == 0) throw ValidationError("time.max_steps", "must be positive");
    if (!(c.time.tolerance >= 1e-12 && c.time.tolerance <= 1e-4)) {
        throw ValidationError("time.tolerance", "must lie in [1e-12, 1e-4]");
    }

    const double delta = 100.0 * c.time.tolerance;
    if (c.initial.w < -1.0 - delta || c.initial.w > 1.0 + delta) {
        throw ValidationError("initial.w", "inversion must lie in [-1, 1]");
    }
    if (c.initial.w * c.initial.w + 4.0 * std::norm(c.initial.s) > 1.0 + delta) {
        throw ValidationError("initial", "state lies outside the Bloch sphere (w^2 + 4|s|^2 > 1)");
    }
    if (c.initial.beta_mode == BetaMode::slow_mode) {
        if (c.model == ModelSelect::A) {
            throw ValidationError("initial.beta_mode", "slow_mode needs model B or both");
        }
        if (!(std::abs(c.initial.s) > 0.0)) {
            throw ValidationError("initial.s", "slow_mode needs a nonzero coherence amplitude");
        }
    }
    if (c.fit.window) {
        const auto& w = *c.fit.window;
        if (!(w.begin >= 0.0 && w.end > w.begin)) {
            throw ValidationError("fit.window", "need 0 <= begin < end");
        }
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path, "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path, std::string("malformed JSON: ") + e.what());
    }
}

ScenarioConfig load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

void save_scenario(const ScenarioConfig& c, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError(path, "cannot write file");
    out << scenario_to_json(c).dump(2) << '\n';
}

namespace {

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
        const auto dot = path.find('.', start);
        parts.push_back(path.substr(start, dot - start));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return parts;
}

json& leaf(json& doc, const std::string& path) {
    json* node = &doc;
    for (const auto& part : split_path(path)) {
        if (!node->is_object() || !node->contains(part)) {
            throw ValidationError("parameter", "\"" + path + "\" does not name a scenario field");
        }
        node = &node->at(part);
    }
    if (!node->is_number()) {
        throw ValidationError("parameter", "\"" + path + "\" is not a numeric field");
    }
    return *node;
}

} // namespace

SweepSpec sweep_from_json(const json& j, const std::string& base_dir) {
    Section root(j, "");
    SweepSpec spec;

    const json* base = root.child("base");
    const std::string base_file = root.text("base_file", "");
    if (base && !base_file.empty()) throw ValidationError("base_file", "give either base or base_file");
    json base_doc;
    if (base) {
        base_doc = *base;
    } else if (!base_file.empty()) {
        const auto p = std::filesystem::path(base_file).is_absolute()
                           ? std::filesystem::path(base_file)
                           : std::filesystem::path(base_dir) / base_file;
        base_doc = read_json_file(p.string());
    } else {
        throw ValidationError("base", "sweep needs a base scenario");
    }
    // normalize: every default becomes an explicit field
    const ScenarioConfig base_cfg = scenario_from_json(base_doc);
    if (base_cfg.model == ModelSelect::both) {
        throw ValidationError("base.model", "a sweep runs a single model (A or B)");
    }
    if (base_cfg.gaussian) {
        throw ValidationError("base.gaussian", "sweeps operate on scaled-unit scenarios");
    }
    spec.base = scenario_to_json(base_cfg);

    spec.parameter = root.text("parameter", "");
    if (spec.parameter.empty()) throw ValidationError("parameter", "required");
    leaf(spec.base, spec.parameter);

    const json* values = root.child("values");
    const json* range = root.child("range");
    if (values && range) throw ValidationError("values", "give either values or range");
    if (values) {
        if (!values->is_array()) throw ValidationError("values", "expected an array of numbers");
        for (const auto& v : *values) {
            if (!v.is_number()) throw ValidationError("values", "expected an array of numbers");
            spec.values.push_back(v.get<double>());
        }
    } else if (range) {
        Section rs(*range, "range");
        const double start = rs.number("start", 0.0);
        const double stop = rs.number("stop", 0.0);
        const std::size_t count = rs.count("count", 0);
        rs.finish();
        for (std::size_t i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
            spec.values.push_back(start + (stop - start) * f);
        }
    } else {
        throw ValidationError("values", "sweep needs values or range");
    }
    if (spec.values.empty()) throw ValidationError("values", "sweep has no points");

    if (const json* ov = root.child("overrides")) {
        if (!ov->is_array() || ov->size() != spec.values.size()) {
            throw ValidationError("overrides", "expected one object per sweep point");
        }
        for (const auto& o : *ov) {
            if (!o.is_object()) throw ValidationError("overrides", "expected objects");
            spec.overrides.push_back(o);
        }
    }

    if (const json* red = root.child("reductions")) {
        if (!red->is_array() || red->empty()) {
            throw ValidationError("reductions", "expected a non-empty array");
        }
        spec.reductions.clear();
        for (const auto& r : *red) {
            const std::string name = r.is_string() ? r.get<std::string>() : "";
            if (name == "ell") spec.reductions.push_back(SweepReduction::ell);
            else if (name == "rate") spec.reductions.push_back(SweepReduction::rate);
            else if (name == "shift") spec.reductions.push_back(SweepReduction::shift);
            else throw ValidationError("reductions", "expected \"ell\", \"rate\" or \"shift\"");
        }
    }
    root.finish();
    return spec;
}

SweepSpec load_sweep(const std::string& path) {
    const auto dir = std::filesystem::path(path).parent_path();
    return sweep_from_json(read_json_file(path), dir.empty() ? "." : dir.string());
}

json sweep_point(const SweepSpec& spec, std::size_t i) {
    json doc = spec.base;
    leaf(doc, spec.parameter) = spec.values.at(i);
    if (!spec.overrides.empty()) doc.merge_patch(spec.overrides.at(i));
    return doc;
}

} // namespace locfield::cli
