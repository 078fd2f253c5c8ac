// SPDX-License-Identifier: Apache-2.0
//
// udn-crash: coverage and area spectral efficiency of dense small-cell networks
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Stochastic-geometry analysis of a typical UE at the origin served by the BS with
// the smallest path loss, BSs forming a homogeneous PPP of density lambda at a fixed
// antenna height difference L, with i.i.d. Rayleigh fading on every link.
//
// Radial variables named `r` are 2D (horizontal) distances, `w` are 3D distances,
// w = sqrt(r^2 + L^2). All lengths are in km.

#ifndef UDN_ANALYTIC_HPP
#define UDN_ANALYTIC_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "udn/channel_model.hpp"
#include "udn/quadrature.hpp"
#include "udn/units.hpp"

namespace udn
{

struct NetworkParams
{
    double density = 100.0;                 // BSs per km^2
    double tx_power_mw = dbm_to_mw(24.0);
    double noise_mw = dbm_to_mw(-95.0);
    double height_diff_km = 0.0;
    FadingKind fading = FadingKind::rayleigh();

    void validate() const
    {
        if (!(density > 0.0))
            throw std::invalid_argument("network density must be positive");
        if (!(tx_power_mw > 0.0))
            throw std::invalid_argument("transmit power must be positive");
        if (!(noise_mw >= 0.0))
            throw std::invalid_argument("noise power must be non-negative");
        if (!(height_diff_km >= 0.0))
            throw std::invalid_argument("antenna height difference must be non-negative");
    }
};

enum class Method
{
    analytic,
    montecarlo
};

inline const char *to_string(Method m) { return m == Method::analytic ? "analytic" : "montecarlo"; }

struct CoverageRecord
{
    double density = 0.0;
    double gamma = 0.0;
    double p_cov = 0.0;
    Method method = Method::analytic;
    double ci_half_width = 0.0;
};

struct AseRecord
{
    double density = 0.0;
    double gamma0 = 0.0;
    double ase = 0.0; // bps/Hz/km^2
    Method method = Method::analytic;
    double ci_half_width = 0.0;
};

// Numerical failure inside the analytic engine, with the evaluation point attached.
class EngineError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

namespace detail
{

inline double to_3d(double r, double L) { return std::sqrt(r * r + L * L); }

inline double to_2d(double w, double L) { return w > L ? std::sqrt(w * w - L * L) : 0.0; }

// Smallest 3D distance at which zeta^{link}(w) has dropped to `target`.
inline double matching_distance_3d(const PathLossModel &model, LinkType link, double target,
                                   const QuadratureSpec &spec)
{
    for (std::size_t m = 0; m < model.piece_count(); ++m)
    {
        const double w = std::pow(model.amplitude(link, m) / target, 1.0 / model.exponent(link, m));
        if (w > model.lower_break(m) && w <= model.upper_break(m))
            return w;
    }
    // No power law crosses the target inside its own piece: the crossing sits on a
    // downward jump at a breakpoint. Bracket it on a log scale.
    const double log_target = std::log(target);
    auto g = [&](double log_w) { return std::log(model.gain(link, std::exp(log_w))) - log_target; };
    const double lo = std::log(1e-9);
    const double hi = std::log(1e9);
    if (g(lo) <= 0.0)
        return 0.0;
    if (g(hi) > 0.0)
        return infinity;
    QuadratureSpec root_spec = spec;
    root_spec.abs_tol = 1e-14;
    return std::exp(solve_monotone_root(g, lo, hi, root_spec));
}

// 2D radial range (lo, hi] of piece n; empty when d_n <= L.
struct RadialRange
{
    double lo;
    double hi;
    bool empty() const { return !(hi > lo); }
};

inline RadialRange radial_range(const PathLossModel &model, std::size_t n, double L)
{
    const double d_lo = std::max(model.lower_break(n), L);
    const double d_hi = model.upper_break(n);
    if (d_hi <= L)
        return {0.0, 0.0};
    return {to_2d(d_lo, L), std::isinf(d_hi) ? infinity : to_2d(d_hi, L)};
}

inline void check_in_range(const PathLossModel &model, std::size_t n, double r, double L, const char *who)
{
    if (n >= model.piece_count())
        throw std::domain_error(std::string(who) + ": piece index out of range");
    const auto range = radial_range(model, n, L);
    constexpr double slack = 1e-12;
    if (range.empty() || r < range.lo * (1.0 - slack) - slack || r > range.hi * (1.0 + slack) + slack || r < 0.0)
        throw std::domain_error(std::string(who) + ": r outside the 2D range of piece " + std::to_string(n));
}

// Expected number of LoS BSs within 2D distance r of the origin.
inline double los_count_within(const PathLossModel &model, const NetworkParams &params, double r)
{
    const double L = params.height_diff_km;
    return 2.0 * pi * params.density * model.los_weighted_mass(L, to_3d(r, L));
}

inline double nlos_count_within(const PathLossModel &model, const NetworkParams &params, double r)
{
    const double L = params.height_diff_km;
    const double w = to_3d(r, L);
    return 2.0 * pi * params.density * ((w * w - L * L) / 2.0 - model.los_weighted_mass(L, w));
}

// Integral over w in [w_lo, inf) of weight(w) * w * t/(1+t), t = s * P * zeta^{link}(w);
// weight is Pr^L for LoS interferers and 1 - Pr^L for NLoS interferers.
inline double interference_exponent(const PathLossModel &model, LinkType link, double w_lo, double s_times_p,
                                    const QuadratureSpec &spec)
{
    if (s_times_p <= 0.0 || std::isinf(w_lo))
        return 0.0;
    const bool los = link == LinkType::los;
    double total = 0.0;
    for (std::size_t m = model.piece_index(std::max(w_lo, 0.0)); m < model.piece_count(); ++m)
    {
        const auto &prob = model.los_pieces()[m];
        if (los ? prob.identically_zero() : prob.identically_one())
            continue;
        const double a = std::max(w_lo, model.lower_break(m));
        const double b = model.upper_break(m);
        if (b <= a)
            continue;
        const double amp = s_times_p * model.amplitude(link, m);
        const double alpha = model.exponent(link, m);
        auto kernel = [&](double w) {
            if (w <= 0.0)
                return 0.0;
            const double p = std::clamp(prob.value(w), 0.0, 1.0);
            const double weight = los ? p : 1.0 - p;
            const double t = amp * std::pow(w, -alpha);
            return weight * w * (t / (1.0 + t));
        };
        if (std::isinf(b))
        {
            if (alpha <= 2.0)
                throw DivergenceError("interference from the outermost piece diverges (exponent <= 2)");
            const double knee = std::pow(amp, 1.0 / alpha);
            // The kernel turns over at the knee; split there so the mapped tail sees a monotone integrand.
            if (knee > a)
            {
                total += integrate(kernel, a, knee, spec);
                total += integrate_to_infinity(kernel, knee, spec, TailStrategy::mapped, knee);
            }
            else
            {
                total += integrate_to_infinity(kernel, a, spec, TailStrategy::mapped, std::max(a, 1e-6));
            }
        }
        else
        {
            total += integrate(kernel, a, b, spec);
        }
    }
    return total;
}

inline double link_gain_in_piece(const PathLossModel &model, LinkType link, std::size_t n, double r, double L)
{
    return model.gain_in_piece(link, n, to_3d(r, L));
}

} // namespace detail

// 2D distance r_1 at which an NLoS BS has the same path loss as a LoS BS of piece n at r.
inline double equivalent_distance_r1(const PathLossModel &model, std::size_t n, double r, double L,
                                     const QuadratureSpec &spec = {})
{
    const double target = detail::link_gain_in_piece(model, LinkType::los, n, r, L);
    return detail::to_2d(detail::matching_distance_3d(model, LinkType::nlos, target, spec), L);
}

// 2D distance r_2 at which a LoS BS has the same path loss as an NLoS BS of piece n at r.
inline double equivalent_distance_r2(const PathLossModel &model, std::size_t n, double r, double L,
                                     const QuadratureSpec &spec = {})
{
    const double target = detail::link_gain_in_piece(model, LinkType::nlos, n, r, L);
    return detail::to_2d(detail::matching_distance_3d(model, LinkType::los, target, spec), L);
}

// Density of the event "the serving BS is LoS, in piece n, at 2D distance r".
inline double distance_pdf_los(const PathLossModel &model, const NetworkParams &params, std::size_t n, double r,
                               const QuadratureSpec &spec = {})
{
    const double L = params.height_diff_km;
    detail::check_in_range(model, n, r, L, "distance_pdf_los");
    const double p = model.los_probability_in_piece(n, detail::to_3d(r, L));
    if (p <= 0.0 || r <= 0.0)
        return 0.0;
    const double r1 = equivalent_distance_r1(model, n, r, L, spec);
    const double void_count =
        detail::nlos_count_within(model, params, r1) + detail::los_count_within(model, params, r);
    return std::exp(-void_count) * p * 2.0 * pi * r * params.density;
}

// Density of the event "the serving BS is NLoS, in piece n, at 2D distance r".
inline double distance_pdf_nlos(const PathLossModel &model, const NetworkParams &params, std::size_t n, double r,
                                const QuadratureSpec &spec = {})
{
    const double L = params.height_diff_km;
    detail::check_in_range(model, n, r, L, "distance_pdf_nlos");
    const double q = 1.0 - model.los_probability_in_piece(n, detail::to_3d(r, L));
    if (q <= 0.0 || r <= 0.0)
        return 0.0;
    const double r2 = equivalent_distance_r2(model, n, r, L, spec);
    const double void_count =
        detail::los_count_within(model, params, r2) + detail::nlos_count_within(model, params, r);
    return std::exp(-void_count) * q * 2.0 * pi * r * params.density;
}

namespace detail
{

// Laplace transform of the aggregate interference seen by a UE served over `serving`
// at 2D distance r; interferers are the BSs weaker than the serving one.
inline double laplace_in_piece(const PathLossModel &model, const NetworkParams &params, LinkType serving,
                               std::size_t n, double r, double s, const QuadratureSpec &spec)
{
    if (!(s >= 0.0) || !(r >= 0.0))
        throw std::domain_error("laplace: need s >= 0 and r >= 0");
    if (s == 0.0)
        return 1.0;
    const double L = params.height_diff_km;
    const double w = to_3d(r, L);
    const double r_other = serving == LinkType::los ? equivalent_distance_r1(model, n, r, L, spec)
                                                    : equivalent_distance_r2(model, n, r, L, spec);
    const double w_other = to_3d(r_other, L);
    const double w_los_lo = serving == LinkType::los ? w : w_other;
    const double w_nlos_lo = serving == LinkType::los ? w_other : w;
    const double sp = s * params.tx_power_mw;
    const double exponent = interference_exponent(model, LinkType::los, w_los_lo, sp, spec) +
                            interference_exponent(model, LinkType::nlos, w_nlos_lo, sp, spec);
    return std::exp(-2.0 * pi * params.density * exponent);
}

inline double laplace(const PathLossModel &model, const NetworkParams &params, LinkType serving, double r, double s,
                      const QuadratureSpec &spec)
{
    const double w = to_3d(r, params.height_diff_km);
    return laplace_in_piece(model, params, serving, model.piece_index(w), r, s, spec);
}

} // namespace detail

inline double laplace_los(const PathLossModel &model, const NetworkParams &params, double r, double s,
                          const QuadratureSpec &spec = {})
{
    return detail::laplace(model, params, LinkType::los, r, s, spec);
}

inline double laplace_nlos(const PathLossModel &model, const NetworkParams &params, double r, double s,
                           const QuadratureSpec &spec = {})
{
    return detail::laplace(model, params, LinkType::nlos, r, s, spec);
}

namespace detail
{

// Integrand of T_n^{link}: Pr[SINR > gamma | serving link at r] * f_{R,n}^{link}(r).
inline double coverage_integrand(const PathLossModel &model, const NetworkParams &params, LinkType link,
                                 std::size_t n, double r, double gamma, const QuadratureSpec &spec)
{
    if (r <= 0.0)
        return 0.0;
    const double pdf = link == LinkType::los ? distance_pdf_los(model, params, n, r, spec)
                                             : distance_pdf_nlos(model, params, n, r, spec);
    if (pdf == 0.0)
        return 0.0;
    const double signal = params.tx_power_mw * link_gain_in_piece(model, link, n, r, params.height_diff_km);
    const double noise_term = std::exp(-gamma * params.noise_mw / signal);
    if (noise_term == 0.0)
        return 0.0;
    return noise_term * laplace_in_piece(model, params, link, n, r, gamma / signal, spec) * pdf;
}

template <class F>
double integrate_piece(const F &f, const RadialRange &range, double density, const QuadratureSpec &spec)
{
    if (std::isinf(range.hi))
    {
        const double scale = std::max(1.0 / std::sqrt(pi * density), range.lo);
        return integrate_to_infinity(f, range.lo, spec, TailStrategy::mapped, scale);
    }
    return integrate(f, range.lo, range.hi, spec);
}

} // namespace detail

// Coverage probability Pr[SINR > gamma] (gamma linear), summing the LoS and NLoS
// serving terms of every piece.
inline double coverage_probability(const PathLossModel &model, const NetworkParams &params, double gamma,
                                   const QuadratureSpec &spec = {})
{
    params.validate();
    if (!(gamma > 0.0))
        throw std::domain_error("coverage_probability: gamma must be positive");
    if (!params.fading.is_rayleigh())
        throw std::invalid_argument("coverage_probability: the analytic engine requires Rayleigh fading");

    const double L = params.height_diff_km;
    double total = 0.0;
    for (std::size_t n = 0; n < model.piece_count(); ++n)
    {
        const auto range = detail::radial_range(model, n, L);
        if (range.empty())
            continue;
        const auto &prob = model.los_pieces()[n];
        for (const LinkType link : {LinkType::los, LinkType::nlos})
        {
            if (link == LinkType::los ? prob.identically_zero() : prob.identically_one())
                continue;
            auto integrand = [&](double r) {
                return detail::coverage_integrand(model, params, link, n, r, gamma, spec);
            };
            try
            {
                total += detail::integrate_piece(integrand, range, params.density, spec);
            }
            catch (const QuadratureError &e)
            {
                std::ostringstream msg;
                msg << "coverage_probability failed (lambda=" << params.density << ", gamma=" << gamma
                    << ", piece=" << n << ", link=" << to_string(link) << ", partial=" << total << "): "
                    << e.what();
                throw EngineError(msg.str());
            }
        }
    }
    return std::clamp(total, 0.0, 1.0);
}

// Coverage probability over an increasing threshold grid; a rise larger than
// 10 * rel_tol between neighbours is reported as a numerical failure.
inline std::vector<CoverageRecord> sinr_ccdf_curve(const PathLossModel &model, const NetworkParams &params,
                                                   const std::vector<double> &gamma_grid,
                                                   const QuadratureSpec &spec = {})
{
    for (std::size_t i = 0; i < gamma_grid.size(); ++i)
    {
        if (!(gamma_grid[i] > 0.0))
            throw std::invalid_argument("sinr_ccdf_curve: thresholds must be positive");
        if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))
            throw std::invalid_argument("sinr_ccdf_curve: thresholds must be strictly increasing");
    }
    std::vector<CoverageRecord> out;
    out.reserve(gamma_grid.size());
    for (const double g : gamma_grid)
    {
        const double p = coverage_probability(model, params, g, spec);
        if (!out.empty() && p - out.back().p_cov > 10.0 * spec.rel_tol * out.back().p_cov + spec.abs_tol)
            throw EngineError("sinr_ccdf_curve: coverage increases with the threshold at gamma=" +
                              std::to_string(g) + "; tighten the quadrature tolerances");
        out.push_back({params.density, g, p, Method::analytic, 0.0});
    }
    return out;
}

struct AseGrid
{
    int points_per_decade = 64;
    double gamma_max = 1e6;
};

// Area spectral efficiency lambda * E[log2(1 + SINR) ; SINR > gamma0], evaluated by
// parts from the coverage curve:
//   lambda * [log2(1+g0) p(g0) + 1/ln2 * int_{g0}^inf p(g)/(1+g) dg].
// The finite part is Simpson on a log-spaced grid, the remainder a mapped tail integral.
inline double ase(const PathLossModel &model, const NetworkParams &params, double gamma0,
                  const QuadratureSpec &spec = {}, const AseGrid &grid = {})
{
    if (!(gamma0 > 0.0))
        throw std::domain_error("ase: gamma0 must be positive");
    auto p = [&](double g) { return coverage_probability(model, params, g, spec); };

    const double p0 = p(gamma0);
    double body = 0.0;
    const double t_lo = std::log(gamma0);
    const double t_hi = std::log(std::max(grid.gamma_max, gamma0));
    if (t_hi > t_lo)
    {
        int intervals = static_cast<int>(std::ceil(grid.points_per_decade * (t_hi - t_lo) / std::log(10.0)));
        intervals = std::max(2, intervals + intervals % 2);
        const double h = (t_hi - t_lo) / intervals;
        auto integrand = [&](int i, double p_at) {
            const double g = std::exp(t_lo + h * i);
            return p_at * g / (1.0 + g);
        };
        double sum = integrand(0, p0);
        for (int i = 1; i <= intervals; ++i)
        {
            const double g = std::exp(t_lo + h * i);
            const double weight = (i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
            sum += weight * integrand(i, p(g));
        }
        body = sum * h / 3.0;
    }

    const double tail_start = std::max(grid.gamma_max, gamma0);
    QuadratureSpec tail_spec = spec;
    tail_spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * std::abs(body));
    double tail = 0.0;
    try
    {
        tail = integrate_to_infinity([&](double g) { return p(g) / (1.0 + g); }, tail_start, tail_spec,
                                     TailStrategy::mapped, tail_start);
    }
    catch (const QuadratureError &e)
    {
        throw EngineError(std::string("ase: tail integral did not converge: ") + e.what());
    }
    return params.density * (std::log2(1.0 + gamma0) * p0 + (body + tail) / std::log(2.0));
}

// SIR of a two-BS toy network: serving BS at 2D distance r, interferer at tau * r,
// both on the same power law of exponent alpha, antenna height difference L.
inline double toy_sir(double r, double L, double tau, double alpha)
{
    if (!(r >= 0.0 && L >= 0.0 && tau > 1.0 && alpha > 0.0))
        throw std::domain_error("toy_sir: need r >= 0, L >= 0, tau > 1, alpha > 0");
    if (r == 0.0 && L == 0.0)
        throw std::domain_error("toy_sir: r = 0 with L = 0 is undefined");
    if (L == 0.0)
        return std::pow(tau, alpha);
    if (r == 0.0)
        return 1.0;
    return std::pow((r * r + L * L) / (tau * tau * r * r + L * L), -alpha / 2.0);
}

} // namespace udn

#endif
