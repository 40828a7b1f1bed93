#include "oracles.hpp"

#include "commands.hpp"
#include "scenario.hpp"

#include "locfield/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace locfield;
using namespace locfield::cli;

namespace {

const std::string scenarios = LOCFIELD_SCENARIO_DIR;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "locfield");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, sep)) cells.push_back(cell);
    if (!line.empty() && line.back() == sep) cells.emplace_back();
    return cells;
}

struct Csv {
    std::string header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

Csv parse_csv(const std::string& text) {
    Csv csv;
    std::istringstream in(text);
    std::string line;
    std::getline(in, csv.header);
    while (std::getline(in, line)) {
        if (line.rfind("#", 0) == 0) {
            csv.comments.push_back(line);
        } else {
            csv.rows.push_back(split(line));
        }
    }
    return csv;
}

std::string write_temp(const std::string& name, const std::string& content) {
    std::ofstream(name) << content;
    return name;
}

} // namespace

TEST_CASE("factor: lossless host") {
    const auto r = run({"factor", "--delta-b", "15", "--eps-b", "10", "--gamma-b", "0", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["re_ell"].get<double>() == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(j["index"][0].get<double>() == doctest::Approx(oracle::index_lossless).epsilon(1e-14));
    CHECK(j["level_shift"].get<double>() == 0.0);
}

TEST_CASE("factor: no coupling and absorbing host") {
    auto r = run({"factor", "--eps-b", "0"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("ell          1 + 0i") != std::string::npos);

    r = run({"factor", "--delta-b", "10", "--eps-b", "10", "--gamma-b", "4", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["re_ell"].get<double>() == doctest::Approx(oracle::ell_ref.real()).epsilon(1e-14));
    CHECK(j["im_ell"].get<double>() == doctest::Approx(oracle::ell_ref.imag()).epsilon(1e-13));
    CHECK(j["level_shift"].get<double>() == doctest::Approx(oracle::shift_ref).epsilon(1e-13));
}

TEST_CASE("factor: validation failures exit 2 with the field named") {
    auto r = run({"factor", "--eps-b", "-1"});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("host.ndd_strength") != std::string::npos);
    r = run({"factor", "--delta-b", "-10", "--eps-b", "10"});
    CHECK(r.code == kExitValidation);
    r = run({"factor", "--eps-b", "abc"});
    CHECK(r.code == kExitValidation);
}

TEST_CASE("compare: table values and ordering") {
    const auto r = run({"compare", "--n-min", "1", "--n-max", "2", "--n-step", "0.1"});
    REQUIRE(r.code == kExitOk);
    const auto csv = parse_csv(r.out);
    CHECK(csv.header == kCompareHeader);
    REQUIRE(csv.rows.size() == 11);
    for (const auto& row : csv.rows) {
        REQUIRE(row.size() == 4);
        CHECK(std::stod(row[1]) <= std::stod(row[2]));
    }
    CHECK(csv.rows.front() == std::vector<std::string>{"1", "1", "1", "1"});
    const auto& mid = csv.rows[5];
    CHECK(std::stod(mid[0]) == doctest::Approx(1.5));
    CHECK(std::stod(mid[1]) == doctest::Approx(oracle::re_ell_15).epsilon(1e-11));
    CHECK(std::stod(mid[2]) == doctest::Approx(oracle::virtual_cavity_15).epsilon(1e-11));
    CHECK(std::stod(mid[3]) == doctest::Approx(oracle::onsager_15).epsilon(1e-11));
}

TEST_CASE("compare: n below one exits 2") {
    CHECK(run({"compare", "--n", "1.2", "--n", "0.9"}).code == kExitValidation);
    CHECK(run({"compare", "--n-min", "0.5", "--n-max", "1.5"}).code == kExitValidation);
    CHECK(run({"compare", "--n-step", "0"}).code == kExitValidation);
}

TEST_CASE("simulate: effective decay scenario") {
    const auto r = run({"simulate", scenarios + "/decay_A.json", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    REQUIRE(j["runs"].size() == 1);
    const auto& run0 = j["runs"][0];
    CHECK(run0["model"] == "A");
    CHECK(run0["observable"] == "population");
    CHECK(run0["predicted_rate"].get<double>() == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(std::abs(run0["fit"]["rate"].get<double>() - 1.4) / 1.4 < 1e-6);
    CHECK(run0["fit"]["rate_error_vs_predicted"].get<double>() < 1e-6);
}

TEST_CASE("simulate: vacuum scenario fits gamma_a in both models") {
    const auto r = run({"simulate", scenarios + "/vacuum_both.json", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    REQUIRE(j["runs"].size() == 2);
    for (const auto& run0 : j["runs"]) CHECK(std::abs(run0["fit"]["rate"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("simulate: weak-excitation model B matches the exact slow eigenvalue") {
    const auto r = run({"simulate", scenarios + "/weak_B.json", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto run0 = json::parse(r.out)["runs"][0];
    CHECK(run0["exact_rate"].get<double>() == doctest::Approx(-oracle::slow_ref.real()).epsilon(1e-13));
    CHECK(run0["fit"]["rate_error_vs_exact"].get<double>() < 1e-3);
    CHECK(run0["fit"]["rate_error_vs_predicted"].get<double>() < 5e-3);
}

TEST_CASE("simulate: human-readable summary") {
    const auto r = run({"simulate", scenarios + "/weak_B.json"});
    REQUIRE(r.code == kExitOk);
    CHECK(r.out.find("Gamma_fit") != std::string::npos);
    CHECK(r.out.find("exact") != std::string::npos);
}

TEST_CASE("simulate: trajectory CSV contract and read-back") {
    const std::string path = "decay_A_traj.csv";
    REQUIRE(run({"simulate", scenarios + "/decay_A.json", "--csv", path}).code == kExitOk);
    const auto text = slurp(path);
    const auto csv = parse_csv(text);
    CHECK(csv.header == "t,re_s,im_s,w,re_beta,im_beta");
    const auto c = load_scenario(scenarios + "/decay_A.json");
    REQUIRE(csv.rows.size() == c.time.samples);
    const auto sim = run_scenario(c, dynamics::Model::effective);
    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        const auto& row = csv.rows[i];
        REQUIRE(row.size() == 6);
        CHECK(row[4].empty());
        CHECK(row[5].empty());
        const double w = std::stod(row[3]);
        CHECK(std::abs(w - sim.trajectory.states[i].w) <= 1e-11 * std::max(1.0, std::abs(w)));
        CHECK(std::stod(row[0]) == doctest::Approx(sim.trajectory.times[i]).epsilon(1e-12));
    }

    // rerun: byte-identical
    const std::string again = "decay_A_traj_again.csv";
    REQUIRE(run({"simulate", scenarios + "/decay_A.json", "--csv", again}).code == kExitOk);
    CHECK(slurp(again) == text);
}

TEST_CASE("simulate: model both writes one CSV per model, beta only for B") {
    const std::string path = "pulse.csv";
    REQUIRE(run({"simulate", scenarios + "/pulse_both.json", "--csv", path}).code == kExitOk);
    REQUIRE(std::filesystem::exists("pulse_A.csv"));
    REQUIRE(std::filesystem::exists("pulse_B.csv"));
    const auto a = parse_csv(slurp("pulse_A.csv"));
    const auto b = parse_csv(slurp("pulse_B.csv"));
    REQUIRE(a.rows.size() == b.rows.size());
    CHECK(a.rows[10][4].empty());
    CHECK_FALSE(b.rows[10][4].empty());
    CHECK_FALSE(b.rows[10][5].empty());
}

TEST_CASE("simulate: summary file") {
    const std::string path = "weak_B_summary.json";
    REQUIRE(run({"simulate", scenarios + "/weak_B.json", "--summary", path}).code == kExitOk);
    const auto j = json::parse(slurp(path));
    CHECK(j["runs"][0]["model"] == "B");
}

TEST_CASE("simulate: integrator failure exits 3 and flushes a marked partial CSV") {
    const auto cfg = write_temp("budget.json", R"({
        "model": "B",
        "host": {"detuning": 10, "ndd_strength": 10, "radiative_rate": 4},
        "drive": {"kind": "constant", "rabi": [3, 0]},
        "time": {"span": 50, "max_steps": 100}
    })");
    const auto r = run({"simulate", cfg, "--csv", "budget.csv"});
    CHECK(r.code == kExitIntegration);
    CHECK(r.err.find("maximum number of steps") != std::string::npos);
    const auto csv = parse_csv(slurp("budget.csv"));
    CHECK(csv.header == kTrajectoryHeader);
    CHECK(!csv.rows.empty());
    REQUIRE(csv.comments.size() == 1);
    CHECK(csv.comments[0].rfind("# integration failed:", 0) == 0);
}

TEST_CASE("simulate: configuration errors exit 2") {
    CHECK(run({"simulate", write_temp("unknown.json", R"({"model": "A", "bogus": 1})")}).code == kExitValidation);
    CHECK(run({"simulate", write_temp("nested.json", R"({"host": {"ndd": 1}})")}).code == kExitValidation);
    CHECK(run({"simulate", write_temp("malformed.json", "{\"model\": ")}).code == kExitValidation);
    CHECK(run({"simulate", "does_not_exist.json"}).code == kExitValidation);
    CHECK(run({"simulate", write_temp("badmodel.json", R"({"model": "C"})")}).code == kExitValidation);
    CHECK(run({"simulate", write_temp("bloch.json", R"({"initial": {"s": [0.6, 0], "w": 0}})")}).code ==
          kExitValidation);
    CHECK(run({"simulate", write_temp("slowA.json", R"({"initial": {"s": [0.01, 0], "beta_mode": "slow_mode"}})")})
              .code == kExitValidation);
    const auto r = run({"simulate", write_temp("gamma_b.json", R"({"model": "B", "host": {"ndd_strength": 1, "detuning": 1}})")});
    CHECK(r.code == kExitValidation);
    CHECK(r.err.find("host.radiative_rate") != std::string::npos);
}

TEST_CASE("scenario: unknown keys are rejected with their path") {
    try {
        scenario_from_json(json::parse(R"({"time": {"span": 1, "spam": 2}})"));
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "time.spam");
    }
}

TEST_CASE("scenario: round trip is value-identical") {
    for (const char* name : {"decay_A", "vacuum_both", "weak_B", "pulse_both", "gaussian_A"}) {
        INFO(name);
        const auto c = load_scenario(scenarios + "/" + name + ".json");
        const auto back = scenario_from_json(scenario_to_json(c));
        CHECK(back == c);
        const std::string path = std::string(name) + "_roundtrip.json";
        save_scenario(c, path);
        CHECK(load_scenario(path) == c);
    }
}

TEST_CASE("scenario: Gaussian section converts to scaled units") {
    const auto c = load_scenario(scenarios + "/gaussian_A.json");
    REQUIRE(c.gaussian.has_value());
    const medium::GaussianInputs host{1e18, 1e-18, 2.5e15};
    const double ga = oracle::gamma_25e15_1e_18;
    CHECK(c.emitter.decay == 1.0);
    CHECK(c.host.ndd_strength == doctest::Approx(medium::ndd_strength(host) / ga).epsilon(1e-12));
    CHECK(c.host.radiative_rate == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.host.detuning == doctest::Approx(5e10 / ga).epsilon(1e-12));
    CHECK(c.emitter.ndd_strength == doctest::Approx(1e-3 * medium::ndd_strength(host) / ga).epsilon(1e-12));
}

TEST_CASE("verify: battery passes; fault injection exits 4") {
    auto r = run({"verify", "--json"});
    REQUIRE(r.code == kExitOk);
    const auto j = json::parse(r.out);
    CHECK(j["passed"] == true);
    CHECK(j["convergence"].size() == 4);

    r = run({"verify", "--inject-fault", "cb-sign"});
    CHECK(r.code == kExitVerification);
    CHECK(r.out.find("FAIL elimination_identity") != std::string::npos);
    CHECK(r.err.find("elimination_identity") != std::string::npos);

    CHECK(run({"verify", "--inject-fault", "nonsense"}).code == kExitValidation);
}

TEST_CASE("verify: kappa table errors decrease strictly") {
    const auto r = run({"verify", "--json", "--parallel"});
    REQUIRE(r.code == kExitOk);
    const auto table = json::parse(r.out)["convergence"];
    for (std::size_t i = 1; i < table.size(); ++i) {
        CHECK(table[i]["eigen_error"].get<double>() < table[i - 1]["eigen_error"].get<double>());
    }
}

TEST_CASE("sweep: local-field factor over the NDD strength") {
    const auto r = run({"sweep", scenarios + "/sweep_eps_b.json"});
    REQUIRE(r.code == kExitOk);
    const auto csv = parse_csv(r.out);
    CHECK(csv.header == "value,re_ell,im_ell,gamma_fit,shift,error");
    REQUIRE(csv.rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        REQUIRE(csv.rows[i].size() == 6);
        CHECK(std::stod(csv.rows[i][1]) == doctest::Approx(oracle::sweep_re_ell[i]).epsilon(1e-11));
        CHECK(std::abs(std::stod(csv.rows[i][3]) - oracle::sweep_re_ell[i]) / oracle::sweep_re_ell[i] < 1e-6);
        CHECK(csv.rows[i][5].empty());
    }
    CHECK(std::stod(csv.rows[0][3]) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sweep: parallel execution keeps rows in input order, byte for byte") {
    const auto serial = run({"sweep", scenarios + "/sweep_eps_b.json"});
    const auto parallel = run({"sweep", scenarios + "/sweep_eps_b.json", "--jobs", "3"});
    REQUIRE(parallel.code == kExitOk);
    CHECK(parallel.out == serial.out);
}

TEST_CASE("sweep: empty range exits 2") {
    CHECK(run({"sweep", scenarios + "/sweep_empty.json"}).code == kExitValidation);
    const auto range = write_temp("range_empty.json", R"({
        "base": {"model": "A"}, "parameter": "host.ndd_strength",
        "range": {"start": 0, "stop": 1, "count": 0}})");
    CHECK(run({"sweep", range}).code == kExitValidation);
}

TEST_CASE("sweep: parameter path must name an existing numeric field") {
    const auto bad = write_temp("bad_path.json", R"({
        "base": {"model": "A"}, "parameter": "host.nope", "values": [1]})");
    CHECK(run({"sweep", bad}).code == kExitValidation);
    const auto both = write_temp("both.json", R"({
        "base": {"model": "both"}, "parameter": "host.ndd_strength", "values": [1]})");
    CHECK(run({"sweep", both}).code == kExitValidation);
}

TEST_CASE("sweep: failing points are reported in the error column") {
    const auto spec = write_temp("singular.json", R"({
        "base": {"model": "A", "host": {"detuning": -5, "radiative_rate": 0}, "initial": {"w": 1}},
        "parameter": "host.ndd_strength",
        "range": {"start": 1, "stop": 9, "count": 5},
        "reductions": ["ell", "rate"]})");
    const auto r = run({"sweep", spec, "--out", "singular.csv"});
    CHECK(r.code == kExitOk);
    const auto csv = parse_csv(slurp("singular.csv"));
    REQUIRE(csv.rows.size() == 5);
    CHECK(csv.rows[2][0] == "5");
    CHECK(csv.rows[2][1].empty());
    CHECK_FALSE(csv.rows[2][5].empty());
    CHECK(csv.rows[0][5].empty());
    CHECK(csv.rows[0][4].empty()); // shift not requested
    CHECK_FALSE(csv.rows[1][5].empty()); // Re(ell) < 0 at eps_b = 3
}

TEST_CASE("command line: usage errors and help") {
    CHECK(run({}).code == kExitValidation);
    CHECK(run({"frobnicate"}).code == kExitValidation);
    CHECK(run({"simulate"}).code == kExitValidation);
    const auto h = run({"--help"});
    CHECK(h.code == kExitOk);
    CHECK(h.out.find("sweep") != std::string::npos);
}
