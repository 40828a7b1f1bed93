// ode.hpp: embedded explicit Runge–Kutta integration with FSAL and
// per-component step acceptance: every component's local error estimate must
// lie within abs + rel·max(|y_n|, |y_n+1|).
//
// Two pairs are provided. Dormand–Prince 8(5,3) is the default; the classic
// Dormand–Prince 5(4) pair is kept as an independent second method.
//
// The integrator lands exactly on every requested output time and on every
// breakpoint (discontinuities of the right-hand side), so outputs carry the
// full accuracy of an accepted step without interpolation.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace locfield::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

enum class Method { dop853, dopri5 };

struct Tolerance {
    double rel = 1e-9;
    double abs = 1e-9;
};

struct Options {
    Tolerance tol;
    Method method = Method::dop853;
    std::size_t max_steps = 20'000'000;
    double initial_step = 0.0; // 0 selects a step automatically
};

struct Stats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evals = 0;
};

template <std::size_t N>
struct Solution {
    std::vector<double> times;
    std::vector<Vec<N>> states;
    Stats stats;
    bool complete = false;
    std::string failure; // set when !complete
};

namespace detail {

// Dormand & Prince (1980) RK5(4)7M. Stage 7 is the FSAL derivative at the
// new point and enters only the error estimate.
struct Dopri5 {
    static constexpr std::size_t stages = 6;
    static constexpr double exponent = 1.0 / 5.0;
    static constexpr double fac_min = 0.2, fac_max = 5.0;
    static constexpr std::array<double, 6> c{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0};
    static constexpr std::array<std::array<double, 6>, 6> a{{
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {1.0 / 5, 0.0, 0.0, 0.0, 0.0, 0.0},
        {3.0 / 40, 9.0 / 40, 0.0, 0.0, 0.0, 0.0},
        {44.0 / 45, -56.0 / 15, 32.0 / 9, 0.0, 0.0, 0.0},
        {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0.0, 0.0},
        {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0.0}}};
    static constexpr std::array<double, 6> b{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                             -2187.0 / 6784, 11.0 / 84};
    // b(5) - b(4); the last weight multiplies the FSAL stage
    static constexpr std::array<double, 7> e{71.0 / 57600, 0.0, -71.0 / 16695, 71.0 / 1920,
                                             -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

    template <std::size_t N>
    static double scaled_error(const std::array<Vec<N>, stages>& k, const Vec<N>& k_new,
                               std::size_t i, double h, double sc) {
        double err = e[6] * k_new[i];
        for (std::size_t j = 0; j < stages; ++j) err += e[j] * k[j][i];
        return std::abs(h * err) / sc;
    }
};

// Dormand & Prince 8(5,3) as in Hairer's DOP853. The error estimate blends
// the fifth- and third-order embedded solutions.
struct Dop853 {
    static constexpr double exponent = 1.0 / 8.0;
    static constexpr double fac_min = 0.333, fac_max = 6.0;
    static constexpr std::size_t stages = 12;
    static constexpr std::array<double, 12> c{
        0.0,
        0.526001519587677318785587544488e-01,
        0.789002279381515978178381316732e-01,
        0.118350341907227396726757197510,
        0.281649658092772603273242802490,
        0.333333333333333333333333333333,
        0.25,
        0.307692307692307692307692307692,
        0.651282051282051282051282051282,
        0.6,
        0.857142857142857142857142857142,
        1.0};
    static constexpr std::array<std::array<double, 12>, 12> a{{
        {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {5.26001519587677318785587544488e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {1.97250569845378994544595329183e-2, 5.91751709536136983633785987549e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {2.95875854768068491816892993775e-2, 0.0, 8.87627564304205475450678981324e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {2.41365134159266685502369798665e-1, 0.0, -8.84549479328286085344864962717e-1, 9.24834003261792003115737966543e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {3.7037037037037037037037037037e-2, 0.0, 0.0, 1.70828608729473871279604482173e-1, 1.25467687566822425016691814123e-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {3.7109375e-2, 0.0, 0.0, 1.70252211019544039314978060272e-1, 6.02165389804559606850219397283e-2, -1.7578125e-2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0},
        {3.70920001185047927108779319836e-2, 0.0, 0.0, 1.70383925712239993810214054705e-1, 1.07262030446373284651809199168e-1, -1.53194377486244017527936158236e-2, 8.27378916381402288758473766002e-3, 0.0, 0.0, 0.0, 0.0, 0.0},
        {6.24110958716075717114429577812e-1, 0.0, 0.0, -3.36089262944694129406857109825, -8.68219346841726006818189891453e-1, 2.75920996994467083049415600797e1, 2.01540675504778934086186788979e1, -4.34898841810699588477366255144e1, 0.0, 0.0, 0.0, 0.0},
        {4.77662536438264365890433908527e-1, 0.0, 0.0, -2.48811461997166764192642586468, -5.90290826836842996371446475743e-1, 2.12300514481811942347288949897e1, 1.52792336328824235832596922938e1, -3.32882109689848629194453265587e1, -2.03312017085086261358222928593e-2, 0.0, 0.0, 0.0},
        {-9.3714243008598732571704021658e-1, 0.0, 0.0, 5.18637242884406370830023853209, 1.09143734899672957818500254654, -8.14978701074692612513997267357, -1.85200656599969598641566180701e1, 2.27394870993505042818970056734e1, 2.49360555267965238987089396762, -3.0467644718982195003823669022, 0.0, 0.0},
        {2.27331014751653820792359768449, 0.0, 0.0, -1.05344954667372501984066689879e1, -2.00087205822486249909675718444, -1.79589318631187989172765950534e1, 2.79488845294199600508499808837e1, -2.85899827713502369474065508674, -8.87285693353062954433549289258, 1.23605671757943030647266201528e1, 6.43392746015763530355970484046e-1, 0.0}}};
    static constexpr std::array<double, 12> b{
        5.42937341165687622380535766363e-2,
        0.0,
        0.0,
        0.0,
        0.0,
        4.45031289275240888144113950566,
        1.89151789931450038304281599044,
        -5.8012039600105847814672114227,
        3.1116436695781989440891606237e-1,
        -1.52160949662516078556178806805e-1,
        2.01365400804030348374776537501e-1,
        4.47106157277725905176885569043e-2};
    // third-order error weights are b minus these
    static constexpr std::array<double, 12> bhat3{
        0.244094488188976377952755905512,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.733846688281611857341361741547,
        0.0,
        0.0,
        0.220588235294117647058823529412e-1};
    static constexpr std::array<double, 12> e5{
        0.1312004499419488073250102996e-1,
        0.0,
        0.0,
        0.0,
        0.0,
        -0.1225156446376204440720569753e+1,
        -0.4957589496572501915214079952,
        0.1664377182454986536961530415e+1,
        -0.3503288487499736816886487290,
        0.3341791187130174790297318841,
        0.8192320648511571246570742613e-1,
        -0.2235530786388629525884427845e-1};

    template <std::size_t N>
    static double scaled_error(const std::array<Vec<N>, stages>& k, const Vec<N>&, std::size_t i,
                               double h, double sc) {
        double e5v = 0.0, e3v = 0.0;
        for (std::size_t j = 0; j < stages; ++j) {
            e5v += e5[j] * k[j][i];
            e3v += (b[j] - bhat3[j]) * k[j][i];
        }
        e5v /= sc;
        e3v /= sc;
        const double d = e5v * e5v + 0.01 * e3v * e3v;
        return d == 0.0 ? 0.0 : std::abs(h) * e5v * e5v / std::sqrt(d);
    }
};

template <std::size_t N>
double weighted_rms(const Vec<N>& v, const Vec<N>& y, const Tolerance& tol) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        const double r = v[i] / (tol.abs + tol.rel * std::abs(y[i]));
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(N));
}

// Hairer–Nørsett–Wanner starting step.
template <std::size_t N, class Rhs>
double initial_step(Rhs& f, double t, const Vec<N>& y, const Vec<N>& dy, double span,
                    double order, const Tolerance& tol, Stats& stats) {
    const double d0 = weighted_rms(y, y, tol);
    const double d1 = weighted_rms(dy, y, tol);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y[i] + h0 * dy[i];
    const Vec<N> f1 = f(t + h0, y1);
    ++stats.rhs_evals;
    Vec<N> diff;
    for (std::size_t i = 0; i < N; ++i) diff[i] = f1[i] - dy[i];
    const double d2 = weighted_rms(diff, y, tol) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / order);
    return std::min({100.0 * h0, h1, span});
}

template <class Tableau, std::size_t N, class Rhs>
Solution<N> run(Rhs& f, const Vec<N>& y0, std::span<const double> grid, const Options& opts,
                std::span<const double> breakpoints) {
    Solution<N> sol;
    sol.times.reserve(grid.size());
    sol.states.reserve(grid.size());
    sol.times.push_back(grid.front());
    sol.states.push_back(y0);

    // forced stops: output times and interior breakpoints, merged
    constexpr double eps = std::numeric_limits<double>::epsilon();
    auto negligible = [](double dt, double at) { return dt < 64.0 * eps * std::max(1.0, std::abs(at)); };

    // forced stops: output times and interior breakpoints, merged. A jump
    // within rounding of an output time is stepped to exactly; the output
    // keeps its grid label.
    struct Stop {
        double t;
        double label;
        bool record;
        bool jump;
    };
    std::vector<Stop> stops;
    stops.reserve(grid.size() + breakpoints.size());
    for (std::size_t i = 1; i < grid.size(); ++i) stops.push_back({grid[i], grid[i], true, false});
    for (double bp : breakpoints) {
        if (bp > grid.front() && bp < grid.back()) stops.push_back({bp, bp, false, true});
    }
    std::stable_sort(stops.begin(), stops.end(), [](const Stop& l, const Stop& r) { return l.t < r.t; });
    std::size_t merged = 0;
    for (const Stop& next : stops) {
        Stop* prev = merged > 0 ? &stops[merged - 1] : nullptr;
        if (prev && negligible(next.t - prev->t, next.t) && !(prev->record && next.record)) {
            if (next.jump) prev->t = next.t;
            if (next.record) prev->label = next.label;
            prev->record |= next.record;
            prev->jump |= next.jump;
        } else {
            stops[merged++] = next;
        }
    }
    stops.resize(merged);

    const Tolerance& tol = opts.tol;
    constexpr double safety = 0.9;
    constexpr std::size_t S = Tableau::stages;

    double t = grid.front();
    Vec<N> y = y0;
    std::array<Vec<N>, S> k;
    k[0] = f(t, y);
    ++sol.stats.rhs_evals;

    double h = opts.initial_step > 0.0
                   ? opts.initial_step
                   : initial_step<N>(f, t, y, k[0], grid.back() - grid.front(),
                                     1.0 / Tableau::exponent, tol, sol.stats);

    for (const auto& [target, label, record, jump] : stops) {
        while (t < target) {
            if (sol.stats.steps + sol.stats.rejected >= opts.max_steps) {
                sol.failure = "maximum number of steps exceeded at t = " + std::to_string(t);
                return sol;
            }
            const double remaining = target - t;
            const bool clipped = h >= remaining;
            const double step = clipped ? remaining : h;
            if (negligible(step, t)) {
                sol.failure = "step size underflow at t = " + std::to_string(t) +
                              "; the system is too stiff for this tolerance "
                              "(loosen tol or reduce the host pole magnitude)";
                return sol;
            }

            // a step ending on a jump samples the right-hand side's left limit there
            const double t_end = clipped && jump ? std::nextafter(target, t) : t + step;
            Vec<N> tmp;
            for (std::size_t s = 1; s < S; ++s) {
                for (std::size_t i = 0; i < N; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < s; ++j) acc += Tableau::a[s][j] * k[j][i];
                    tmp[i] = y[i] + step * acc;
                }
                k[s] = f(Tableau::c[s] == 1.0 ? t_end : t + Tableau::c[s] * step, tmp);
            }
            Vec<N> y_new;
            for (std::size_t i = 0; i < N; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < S; ++j) acc += Tableau::b[j] * k[j][i];
                y_new[i] = y[i] + step * acc;
            }
            const double t_new = clipped ? target : t + step;
            const Vec<N> k_new = f(t_end, y_new);
            sol.stats.rhs_evals += S;

            double err = 0.0;
            for (std::size_t i = 0; i < N; ++i) {
                const double sc = tol.abs + tol.rel * std::max(std::abs(y[i]), std::abs(y_new[i]));
                err = std::max(err, Tableau::template scaled_error<N>(k, k_new, i, step, sc));
            }
            const bool finite = std::isfinite(err);
            const double fac =
                !finite ? Tableau::fac_min
                : err == 0.0
                    ? Tableau::fac_max
                    : std::clamp(safety * std::pow(err, -Tableau::exponent), Tableau::fac_min,
                                 Tableau::fac_max);

            if (finite && err <= 1.0) {
                t = t_new;
                y = y_new;
                k[0] = k_new;
                ++sol.stats.steps;
                // a clipped step says nothing about the natural step size
                h = clipped ? std::max(h, step * fac) : step * fac;
            } else {
                ++sol.stats.rejected;
                h = step * std::min(fac, 1.0);
            }
        }
        if (record) {
            sol.times.push_back(label);
            sol.states.push_back(y);
        }
        if (jump) {
            // the FSAL derivative is the left limit; restart from the right one
            k[0] = f(t, y);
            ++sol.stats.rhs_evals;
        }
    }
    sol.complete = true;
    return sol;
}

} // namespace detail

// Integrates y' = f(t, y) from grid.front() through every grid point.
// `grid` must be strictly increasing with at least two entries; `breakpoints`
// are extra forced stops that are not recorded. Step-size failure does not
// throw: the returned Solution is partial with `complete == false`.
template <std::size_t N, class Rhs>
Solution<N> solve(Rhs&& f, const Vec<N>& y0, std::span<const double> grid, const Options& opts,
                  std::span<const double> breakpoints = {}) {
    switch (opts.method) {
    case Method::dopri5: return detail::run<detail::Dopri5, N>(f, y0, grid, opts, breakpoints);
    case Method::dop853: break;
    }
    return detail::run<detail::Dop853, N>(f, y0, grid, opts, breakpoints);
}

} // namespace locfield::ode
