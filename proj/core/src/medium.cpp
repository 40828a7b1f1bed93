#include "locfield/medium.hpp"

#include "locfield/errors.hpp"

#include <cmath>

namespace locfield::medium {

namespace {

void require_nonnegative(double v, const char* field) {
    if (!std::isfinite(v) || v < 0.0) {
        throw ValidationError(field, "must be finite and non-negative");
    }
}

} // namespace

void validate(const GaussianInputs& g) {
    require_nonnegative(g.number_density, "number_density");
    require_nonnegative(g.dipole_moment, "dipole_moment");
    if (!std::isfinite(g.angular_frequency) || g.angular_frequency <= 0.0) {
        throw ValidationError("angular_frequency", "must be finite and positive");
    }
}

double ndd_strength(const GaussianInputs& g) {
    validate(g);
    const double mu2 = g.dipole_moment * g.dipole_moment;
    return 4.0 * constants::pi * g.number_density * mu2 / (3.0 * constants::hbar);
}

double radiative_rate(const GaussianInputs& g) {
    validate(g);
    const double w = g.angular_frequency;
    const double mu2 = g.dipole_moment * g.dipole_moment;
    const double c3 = constants::c * constants::c * constants::c;
    return 4.0 * w * w * w * mu2 / (3.0 * c3 * constants::hbar);
}

void validate(const HostSpecies& h) {
    if (!std::isfinite(h.detuning)) {
        throw ValidationError("host.detuning", "must be finite");
    }
    require_nonnegative(h.ndd_strength, "host.ndd_strength");
    require_nonnegative(h.radiative_rate, "host.radiative_rate");
    if (h.ndd_strength > 0.0 && h.pole() == complex{0.0, 0.0}) {
        throw SingularHostError(
            "host pole detuning + ndd_strength + i*radiative_rate/2 is zero");
    }
}

complex refractive_index(complex ell) {
    // std::sqrt returns the principal branch, Re >= 0.
    return std::sqrt(3.0 * ell - 2.0);
}

LocalFieldFactor local_field_factor(const HostSpecies& h) {
    validate(h);
    if (h.ndd_strength == 0.0) {
        return {};
    }
    const complex ell = 1.0 + h.ndd_strength / h.pole();
    return {ell, refractive_index(ell)};
}

double level_shift(complex ell, double gamma_a) {
    if (!std::isfinite(gamma_a) || gamma_a <= 0.0) {
        throw ValidationError("gamma_a", "must be finite and positive");
    }
    return std::abs(ell.imag()) * gamma_a / 2.0;
}

double signed_level_shift(complex ell, double gamma_a) {
    if (!std::isfinite(gamma_a) || gamma_a <= 0.0) {
        throw ValidationError("gamma_a", "must be finite and positive");
    }
    return -ell.imag() * gamma_a / 2.0;
}

RateComparison rate_comparison(double n) {
    if (!std::isfinite(n) || n < 1.0) {
        throw ValidationError("n", "rate comparison requires a real index n >= 1");
    }
    const double n2 = n * n;
    const double lorentz = (n2 + 2.0) / 3.0;
    const double onsager = 3.0 * n2 / (2.0 * n2 + 1.0);
    return {n, lorentz, n * lorentz * lorentz, n * onsager * onsager};
}

ScaledSpecies to_scaled(const GaussianInputs& emitter, const GaussianInputs& host,
                        double host_detuning_rad_s) {
    validate(emitter);
    validate(host);
    if (std::abs(host.angular_frequency - emitter.angular_frequency) >
        1e-12 * emitter.angular_frequency) {
        throw ValidationError("host.angular_frequency",
                              "both species radiate at the carrier frequency");
    }
    if (!std::isfinite(host_detuning_rad_s)) {
        throw ValidationError("host.detuning", "must be finite");
    }
    const double gamma_a = radiative_rate(emitter);
    if (gamma_a <= 0.0) {
        throw ValidationError("emitter.dipole_moment", "emitter must radiate (mu > 0)");
    }
    ScaledSpecies out;
    out.gamma_a_rad_s = gamma_a;
    out.emitter_ndd = ndd_strength(emitter) / gamma_a;
    out.host.detuning = host_detuning_rad_s / gamma_a;
    out.host.ndd_strength = ndd_strength(host) / gamma_a;
    out.host.radiative_rate = radiative_rate(host) / gamma_a;
    return out;
}

} // namespace locfield::medium
