// Reference values computed independently (30-digit arithmetic) and frozen.

#pragma once

#include <complex>

namespace oracle {

using complex = std::complex<double>;

// host (Δ_b, ε_b, γ_b) = (10, 10, 4)
inline const complex ell_ref{1.4950495049504950, -0.0495049504950495};
inline const complex index_ref{1.5771383530564643, -0.0470836471630182};
inline constexpr double shift_ref = 0.0247524752475248;

// host (15, 10, 0): lossless ℓ = 1.4
inline constexpr double index_lossless = 1.4832396974191326;

// rate comparison at n = 1.5
inline constexpr double re_ell_15 = 1.4166666666666667;
inline constexpr double virtual_cavity_15 = 3.0104166666666667;
inline constexpr double onsager_15 = 2.2592975206611570;

// Gaussian conversions, CODATA ħ
inline constexpr double ndd_1e18_1e_18 = 3.97202934618761e9;  // N = 1e18 cm^-3, μ = 1e-18 statC cm
inline constexpr double gamma_25e15_1e_18 = 733196.6855267968; // ω = 2.5e15 rad/s, μ = 1e-18

// reference scenario: Δ_a = ε_a = 0, γ_a = 1, host (10, 10, 4)
inline const complex slow_ref{-0.7492188776803400, 0.0155980783788688};
inline const complex predicted_ref{-0.7475247524752475, 0.0247524752475248};

// |λ_exact - λ_pred| under κ-scaling
struct KappaRow {
    double kappa;
    complex exact;
    double error;
};
inline const KappaRow kappa_table[] = {
    {1.0, {-0.7492188776803400, 0.0155980783788688}, 9.30983577939957e-3},
    {2.0, {-0.7484828022647884, 0.0202088625758001}, 4.64351973290692e-3},
    {4.0, {-0.7480309972289664, 0.0224902364295689}, 2.31819072125964e-3},
    {8.0, {-0.7477846061842266, 0.0236238892058428}, 1.15811502172690e-3},
    {16.0, {-0.7476563524977679, 0.0241888329199538}, 5.78801554383667e-4},
};

// sweep ε_b ∈ {0, 5, 10} at Δ_b + ε_b = 20, γ_b = 4
inline constexpr double sweep_re_ell[] = {1.0, 1.2475247524752475, 1.4950495049504950};

// exp(3M) for M = [[-0.5, -5i], [-1, -2+20i]]
inline const complex expm_3M[2][2] = {
    {{0.105607856, 0.00632307}, {0.0276991991, 0.00018882}},
    {{3.77649928e-05, -0.00553984}, {-5.13229263e-03, -0.00274199}},
};

} // namespace oracle
