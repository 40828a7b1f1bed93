#include "oracles.hpp"

#include "locfield/errors.hpp"
#include "locfield/medium.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace locfield;
using namespace locfield::medium;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

HostSpecies random_host(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> eps(0.0, 50.0), gam(1e-3, 20.0), det(-200.0, 200.0);
    HostSpecies h{det(rng), eps(rng), gam(rng)};
    return h;
}

} // namespace

TEST_CASE("Gaussian conversions match the reference constants") {
    const GaussianInputs host{1e18, 1e-18, 2.5e15};
    CHECK(rel(ndd_strength(host), oracle::ndd_1e18_1e_18) < 1e-12);
    CHECK(rel(radiative_rate(host), oracle::gamma_25e15_1e_18) < 1e-12);

    // ε ∝ N, γ ∝ ω³, both ∝ μ²
    const GaussianInputs doubled{2e18, 2e-18, 5e15};
    CHECK(rel(ndd_strength(doubled), 8.0 * oracle::ndd_1e18_1e_18) < 1e-12);
    CHECK(rel(radiative_rate(doubled), 32.0 * oracle::gamma_25e15_1e_18) < 1e-12);
}

TEST_CASE("Gaussian inputs: zero density or dipole gives zero rates") {
    CHECK(ndd_strength({0.0, 1e-18, 1e15}) == 0.0);
    CHECK(radiative_rate({1e18, 0.0, 1e15}) == 0.0);
}

TEST_CASE("Gaussian inputs: invalid values are rejected") {
    CHECK_THROWS_AS(validate(GaussianInputs{-1.0, 1e-18, 1e15}), ValidationError);
    CHECK_THROWS_AS(validate(GaussianInputs{1e18, -1e-18, 1e15}), ValidationError);
    CHECK_THROWS_AS(validate(GaussianInputs{1e18, 1e-18, 0.0}), ValidationError);
    CHECK_THROWS_AS(validate(GaussianInputs{std::nan(""), 1e-18, 1e15}), ValidationError);
    CHECK_THROWS_AS(ndd_strength({1e18, 1e-18, -2.0}), ValidationError);
    try {
        validate(GaussianInputs{1e18, 1e-18, 0.0});
    } catch (const ValidationError& e) {
        CHECK(e.field() == "angular_frequency");
    }
}

TEST_CASE("lossless host gives real ell = 1.4") {
    const auto f = local_field_factor({15.0, 10.0, 0.0});
    CHECK(f.ell.real() == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(f.ell.imag() == 0.0);
    CHECK(f.index.real() == doctest::Approx(oracle::index_lossless).epsilon(1e-14));
    CHECK(f.index.imag() == 0.0);
    CHECK(level_shift(f.ell, 1.0) == 0.0);
}

TEST_CASE("absorbing host reference values") {
    const auto f = local_field_factor({10.0, 10.0, 4.0});
    CHECK(std::abs(f.ell - oracle::ell_ref) < 1e-14);
    CHECK(std::abs(f.index - oracle::index_ref) < 1e-14);
    CHECK(level_shift(f.ell, 1.0) == doctest::Approx(oracle::shift_ref).epsilon(1e-13));
    CHECK(signed_level_shift(f.ell, 1.0) == doctest::Approx(oracle::shift_ref).epsilon(1e-13));
    CHECK(level_shift(f.ell, 2.0) == doctest::Approx(2.0 * oracle::shift_ref).epsilon(1e-13));
}

TEST_CASE("no NDD coupling means ell = 1 even at a vanishing pole") {
    for (const HostSpecies h : {HostSpecies{0.0, 0.0, 0.0}, HostSpecies{3.0, 0.0, 1.0},
                                HostSpecies{-7.0, 0.0, 0.0}}) {
        const auto f = local_field_factor(h);
        CHECK(f.ell == complex{1.0, 0.0});
        CHECK(f.index == complex{1.0, 0.0});
    }
}

TEST_CASE("singular host pole with NDD coupling is rejected") {
    CHECK_THROWS_AS(local_field_factor({-10.0, 10.0, 0.0}), SingularHostError);
    CHECK_NOTHROW(local_field_factor({-10.0, 10.0, 1e-6}));
}

TEST_CASE("host validation names the field") {
    CHECK_THROWS_AS(local_field_factor({0.0, -1.0, 1.0}), ValidationError);
    CHECK_THROWS_AS(local_field_factor({0.0, 1.0, -1.0}), ValidationError);
    CHECK_THROWS_AS(local_field_factor({std::numeric_limits<double>::infinity(), 1.0, 1.0}),
                    ValidationError);
    try {
        local_field_factor({0.0, 1.0, -1.0});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "host.radiative_rate");
    }
}

TEST_CASE("property: n^2 = 3 ell - 2 round trip and principal branch") {
    std::mt19937_64 rng(20261015);
    for (int i = 0; i < 500; ++i) {
        const HostSpecies h = random_host(rng);
        const auto f = local_field_factor(h);
        const complex back = (f.index * f.index + 2.0) / 3.0;
        CHECK(std::abs(back - f.ell) <= 1e-12 * std::max(1.0, std::abs(f.ell)));
        CHECK(f.index.real() >= 0.0);
    }
}

TEST_CASE("property: absorbing host has Im(ell) <= 0 and a nonnegative shift") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 500; ++i) {
        const HostSpecies h = random_host(rng);
        const auto f = local_field_factor(h);
        CHECK(f.ell.imag() <= 0.0);
        CHECK(signed_level_shift(f.ell, 1.0) >= 0.0);
        CHECK(level_shift(f.ell, 1.0) == doctest::Approx(signed_level_shift(f.ell, 1.0)));
    }
}

TEST_CASE("property: ell is invariant when the host pole and coupling scale together") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 100; ++i) {
        const HostSpecies h = random_host(rng);
        const auto base = local_field_factor(h).ell;
        for (double k : {0.5, 2.0, 8.0, 100.0}) {
            const auto scaled = local_field_factor({k * h.detuning, k * h.ndd_strength, k * h.radiative_rate}).ell;
            CHECK(std::abs(scaled - base) <= 1e-12 * std::abs(base));
        }
    }
}

TEST_CASE("refractive index of ell = 1 is 1; below-unity ell gives n < 1") {
    CHECK(refractive_index({1.0, 0.0}) == complex{1.0, 0.0});
    CHECK(refractive_index({0.8, 0.0}).real() < 1.0);
}

TEST_CASE("level shift rejects a non-positive decay rate") {
    CHECK_THROWS_AS(level_shift({1.0, -0.1}, 0.0), ValidationError);
    CHECK_THROWS_AS(signed_level_shift({1.0, -0.1}, -1.0), ValidationError);
}

TEST_CASE("rate comparison at n = 1.5") {
    const auto r = rate_comparison(1.5);
    CHECK(r.re_ell == doctest::Approx(oracle::re_ell_15).epsilon(1e-15));
    CHECK(r.virtual_cavity == doctest::Approx(oracle::virtual_cavity_15).epsilon(1e-15));
    CHECK(r.onsager == doctest::Approx(oracle::onsager_15).epsilon(1e-15));
    CHECK(r.virtual_cavity / r.re_ell == doctest::Approx(2.125).epsilon(1e-15));
}

TEST_CASE("rate comparison at n = 1 is unity everywhere") {
    const auto r = rate_comparison(1.0);
    CHECK(r.re_ell == 1.0);
    CHECK(r.virtual_cavity == 1.0);
    CHECK(r.onsager == 1.0);
}

TEST_CASE("rate comparison rejects n < 1 and non-finite n") {
    CHECK_THROWS_AS(rate_comparison(0.999), ValidationError);
    CHECK_THROWS_AS(rate_comparison(std::nan("")), ValidationError);
}

TEST_CASE("property: re_ell <= onsager <= virtual_cavity for n >= 1") {
    for (int i = 0; i <= 400; ++i) {
        const double n = 1.0 + 0.01 * i;
        const auto r = rate_comparison(n);
        CHECK(r.re_ell <= r.virtual_cavity);
        CHECK(r.onsager <= r.virtual_cavity * (1.0 + 1e-15));
        CHECK(r.re_ell == doctest::Approx((n * n + 2.0) / 3.0).epsilon(1e-15));
    }
}

TEST_CASE("to_scaled divides by the emitter radiative rate") {
    const GaussianInputs emitter{1e15, 1e-18, 2.5e15};
    const GaussianInputs host{1e18, 1e-18, 2.5e15};
    const auto s = to_scaled(emitter, host, 5e10);
    const double ga = oracle::gamma_25e15_1e_18;
    CHECK(rel(s.gamma_a_rad_s, ga) < 1e-12);
    CHECK(rel(s.emitter_ndd, oracle::ndd_1e18_1e_18 * 1e-3 / ga) < 1e-12);
    CHECK(rel(s.host.ndd_strength, oracle::ndd_1e18_1e_18 / ga) < 1e-12);
    CHECK(rel(s.host.radiative_rate, 1.0) < 1e-12);
    CHECK(rel(s.host.detuning, 5e10 / ga) < 1e-12);
}

TEST_CASE("to_scaled rejects mismatched carriers and a dark emitter") {
    const GaussianInputs host{1e18, 1e-18, 2.5e15};
    CHECK_THROWS_AS(to_scaled({1e15, 1e-18, 2.4e15}, host, 0.0), ValidationError);
    CHECK_THROWS_AS(to_scaled({1e15, 0.0, 2.5e15}, host, 0.0), ValidationError);
}
