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

// Monte Carlo estimator of coverage and ASE on explicit Poisson BS fields.
//
// Each trial draws a PPP on a disc of radius sim_radius around the typical UE,
// assigns independent LoS states, serves the UE from the BS with the largest
// P * zeta (smallest path loss), and draws one fading gain per link.
//
// ASE estimator: with SINR distributed as f_Gamma, the analytic ASE is
//   lambda * int_{g0}^inf log2(1+g) f_Gamma(g) dg = lambda * E[log2(1+SINR) 1{SINR > g0}],
// so the sample mean of the truncated rate times lambda is unbiased for it.

#ifndef UDN_HPPP_SIM_HPP
#define UDN_HPPP_SIM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "udn/analytic.hpp"
#include "udn/channel_model.hpp"
#include "udn/quadrature.hpp"

namespace udn
{

struct TrialConfig
{
    NetworkParams params;
    PathLossModel model = preset_3gpp_case1();
    double sim_radius_km = 1.0;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: hardware concurrency

    void validate() const
    {
        params.validate();
        if (!(sim_radius_km > 0.0))
            throw std::invalid_argument("sim_radius must be positive");
        if (trials < 1)
            throw std::invalid_argument("trials must be >= 1");
    }
};

struct TrialOutcome
{
    double serving_2d_distance_km = 0.0;
    LinkType serving_link = LinkType::nlos;
    double sinr = 0.0;
    std::size_t num_bs = 0;
    std::size_t resamples = 0; // empty realizations discarded before this one
};

struct BaseStationSample
{
    double r_km;  // 2D distance to the UE
    double w_km;  // 3D distance
    LinkType link;
    double gain;  // zeta(w), linear
};

struct Estimate
{
    double value = 0.0;
    double ci_half_width = 0.0; // 95 %
};

// Stream for trial `index` of a run seeded with `seed`; independent of execution order.
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t index)
{
    auto splitmix = [](std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    const std::uint64_t a = splitmix(seed);
    const std::uint64_t b = splitmix(a ^ splitmix(index + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

namespace detail
{

struct TailTerm
{
    double weight;
    double amplitude;
    double exponent;
};

// LoS/NLoS components of the outermost piece; its LoS probability is constant.
inline std::vector<TailTerm> outer_tail_terms(const PathLossModel &model)
{
    const std::size_t last = model.piece_count() - 1;
    const double p = model.los_probability_in_piece(last, model.lower_break(last) + 1.0);
    std::vector<TailTerm> terms;
    if (p > 0.0)
        terms.push_back({p, model.amplitude(LinkType::los, last), model.exponent(LinkType::los, last)});
    if (p < 1.0)
        terms.push_back({1.0 - p, model.amplitude(LinkType::nlos, last), model.exponent(LinkType::nlos, last)});
    return terms;
}

} // namespace detail

namespace detail
{

// int_lo^hi w^k dw with 0 < lo; hi may be +inf when k < -1.
inline double power_integral(double k, double lo, double hi)
{
    if (std::isinf(hi))
    {
        if (!(k < -1.0))
            throw std::domain_error("mean interference diverges: outermost path loss exponent <= 2");
        return -std::pow(lo, k + 1.0) / (k + 1.0);
    }
    if (k == -1.0)
        return std::log(hi / lo);
    return (std::pow(hi, k + 1.0) - std::pow(lo, k + 1.0)) / (k + 1.0);
}

// int_lo^hi q(w) w^{1 - alpha} dw, with q = Pr^L of the piece or its complement.
inline double weighted_power_integral(const LosProbabilityPiece &piece, bool complement, double alpha, double lo,
                                      double hi)
{
    double c0 = piece.form == LosProbabilityPiece::Form::zero ? 0.0 : piece.intercept;
    double c1 = piece.form == LosProbabilityPiece::Form::linear ? piece.slope : 0.0;
    if (complement)
    {
        c0 = 1.0 - c0;
        c1 = -c1;
    }
    double total = 0.0;
    if (c0 != 0.0)
        total += c0 * power_integral(1.0 - alpha, lo, hi);
    if (c1 != 0.0)
        total += c1 * power_integral(2.0 - alpha, lo, hi);
    return total;
}

} // namespace detail

// Campbell mean of the interference from BSs beyond 2D radius R, in closed form
// piece by piece: 2 pi lambda P int_{w_R}^inf E[zeta](w) w dw.
inline double mean_interference_beyond(const PathLossModel &model, const NetworkParams &params, double radius_km)
{
    const double w = std::sqrt(radius_km * radius_km + params.height_diff_km * params.height_diff_km);
    if (!(w > 0.0))
        throw std::domain_error("mean_interference_beyond: need R > 0 or L > 0");
    double total = 0.0;
    for (std::size_t n = model.piece_index(w); n < model.piece_count(); ++n)
    {
        const double lo = std::max(w, model.lower_break(n));
        const double hi = model.upper_break(n);
        if (!(hi > lo))
            continue;
        const auto &q = model.los_pieces()[n];
        total += model.amplitude(LinkType::los, n) *
                     detail::weighted_power_integral(q, false, model.exponent(LinkType::los, n), lo, hi) +
                 model.amplitude(LinkType::nlos, n) *
                     detail::weighted_power_integral(q, true, model.exponent(LinkType::nlos, n), lo, hi);
    }
    return 2.0 * pi * params.density * params.tx_power_mw * total;
}

// Mean interference from BSs with 2D distance in [r_lo, r_hi]; `los_share` scales the
// LoS component (1 for the full mean, 0 for the NLoS part only).
inline double mean_interference_between(const PathLossModel &model, const NetworkParams &params, double r_lo,
                                        double r_hi, const QuadratureSpec &spec = {}, double los_share = 1.0)
{
    const double L = params.height_diff_km;
    auto mean_gain_w = [&](double w) {
        const double p = model.los_probability(w);
        return (los_share * p * model.gain(LinkType::los, w) + (1.0 - p) * model.gain(LinkType::nlos, w)) * w;
    };
    const double w_lo = std::sqrt(r_lo * r_lo + L * L);
    const double w_hi = std::sqrt(r_hi * r_hi + L * L);
    double total = 0.0;
    double a = w_lo;
    for (std::size_t n = model.piece_index(w_lo); n < model.piece_count() && a < w_hi; ++n)
    {
        const double b = std::min(w_hi, model.upper_break(n));
        if (b > a)
            total += integrate(mean_gain_w, a, b, spec);
        a = b;
    }
    return 2.0 * pi * params.density * params.tx_power_mw * total;
}

// Smallest simulation radius R such that the mean interference dropped beyond R is
// at most eps * (N0 + mean NLoS interference between the typical serving distance
// and R), and such that a realization is empty with probability at most eps.
// The LoS part of the in-disc mean is left out of the reference: it is dominated by
// rare close interferers and would let R shrink below what noise-limited fields need.
inline double truncation_radius(const PathLossModel &model, const NetworkParams &params, double eps,
                                const QuadratureSpec &spec = {})
{
    params.validate();
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("truncation_radius: eps must lie in (0, 1)");
    for (const auto &term : detail::outer_tail_terms(model))
        if (term.exponent <= 2.0)
            throw std::domain_error("truncation_radius: outermost path loss exponent <= 2, mean interference diverges");

    const double L = params.height_diff_km;
    const std::size_t last = model.piece_count() - 1;
    const double outer_break_2d = detail::to_2d(std::max(model.lower_break(last), L), L);
    const double typical = 0.5 / std::sqrt(params.density);
    const double occupancy = std::sqrt(std::log(1.0 / eps) / (pi * params.density));

    const double r_start = std::max({outer_break_2d, typical, 1e-6});
    auto excess = [&](double R) {
        return mean_interference_beyond(model, params, R) -
               eps * (params.noise_mw + mean_interference_between(model, params, typical, R, spec, 0.0));
    };
    double R = r_start;
    if (excess(r_start) > 0.0)
    {
        double hi = 2.0 * r_start;
        while (excess(hi) > 0.0)
        {
            hi *= 2.0;
            if (hi > 1e6)
                throw std::domain_error("truncation_radius: no finite radius meets the bias target");
        }
        QuadratureSpec root_spec = spec;
        root_spec.abs_tol = 1e-9 * hi;
        R = solve_monotone_root(excess, hi / 2.0, hi, root_spec);
    }
    return std::max(R, occupancy);
}

// Default simulation radius: truncation_radius(eps), capped at 2e6 expected BSs.
inline double default_sim_radius(const PathLossModel &model, const NetworkParams &params, double eps = 0.005)
{
    const double cap = std::sqrt(2e6 / (pi * params.density));
    return std::min(truncation_radius(model, params, eps), cap);
}

// Draws BS positions and LoS states; never returns an empty field (empty draws are
// counted in `resamples`).
template <class Rng>
std::vector<BaseStationSample> realize_field(const TrialConfig &cfg, Rng &rng, std::size_t *resamples = nullptr)
{
    const double L = cfg.params.height_diff_km;
    const double R = cfg.sim_radius_km;
    std::poisson_distribution<std::size_t> count_dist(cfg.params.density * pi * R * R);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::size_t empty = 0;
    std::size_t count = 0;
    while ((count = count_dist(rng)) == 0)
    {
        if (++empty > 100000)
            throw std::runtime_error("realize_field: the simulation disc is almost surely empty");
    }
    if (resamples)
        *resamples = empty;

    std::vector<BaseStationSample> field;
    field.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        const double r = R * std::sqrt(unif(rng));
        const double w = std::sqrt(r * r + L * L);
        const double p = cfg.model.los_probability(w);
        LinkType link = LinkType::nlos;
        if (p >= 1.0 || (p > 0.0 && unif(rng) < p))
            link = LinkType::los;
        field.push_back({r, w, link, cfg.model.gain(link, w)});
    }
    return field;
}

// Index of the BS with the largest path loss gain; ties go to the nearer BS.
inline std::size_t serving_index(const std::vector<BaseStationSample> &field)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < field.size(); ++i)
    {
        const auto &a = field[i];
        const auto &b = field[best];
        if (a.gain > b.gain || (a.gain == b.gain && a.r_km < b.r_km))
            best = i;
    }
    return best;
}

template <class Rng>
TrialOutcome run_trial(const TrialConfig &cfg, Rng &rng)
{
    std::size_t resamples = 0;
    const auto field = realize_field(cfg, rng, &resamples);
    const std::size_t s = serving_index(field);
    const double p = cfg.params.tx_power_mw;
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t i = 0; i < field.size(); ++i)
    {
        const double h = sample_fading(cfg.params.fading, field[i].w_km, rng);
        if (i == s)
            signal = p * field[i].gain * h;
        else
            interference += p * field[i].gain * h;
    }
    const double denom = interference + cfg.params.noise_mw;
    const double sinr = denom > 0.0 ? signal / denom : std::numeric_limits<double>::infinity();
    return {field[s].r_km, field[s].link, sinr, field.size(), resamples};
}

// Runs every trial of cfg; outcome i depends only on (cfg.seed, i).
inline std::vector<TrialOutcome> run_trials(const TrialConfig &cfg)
{
    cfg.validate();
    std::vector<TrialOutcome> outcomes(cfg.trials);
    unsigned workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, cfg.trials));

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
        {
            auto rng = trial_rng(cfg.seed, i);
            outcomes[i] = run_trial(cfg, rng);
        }
    };
    if (workers <= 1)
    {
        work(0, cfg.trials);
        return outcomes;
    }
    std::vector<std::jthread> pool;
    const std::size_t chunk = (cfg.trials + workers - 1) / workers;
    for (unsigned t = 0; t < workers; ++t)
    {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(cfg.trials, begin + chunk);
        if (begin < end)
            pool.emplace_back(work, begin, end);
    }
    pool.clear();
    return outcomes;
}

// Neumaier-compensated running sum.
class CompensatedSum
{
public:
    void add(double x)
    {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline Estimate coverage_estimate(const std::vector<TrialOutcome> &outcomes, double gamma)
{
    if (outcomes.empty())
        throw std::invalid_argument("coverage_estimate: no trials");
    std::size_t covered = 0;
    for (const auto &o : outcomes)
        covered += o.sinr > gamma ? 1 : 0;
    const double n = static_cast<double>(outcomes.size());
    const double p = covered / n;
    // Agresti-Coull half-width: stays positive when no trial (or every trial) is covered.
    constexpr double z = 1.96;
    const double n_adj = n + z * z;
    const double p_adj = (covered + z * z / 2.0) / n_adj;
    return {p, z * std::sqrt(p_adj * (1.0 - p_adj) / n_adj)};
}

inline Estimate ase_estimate(const std::vector<TrialOutcome> &outcomes, double density, double gamma0)
{
    if (outcomes.empty())
        throw std::invalid_argument("ase_estimate: no trials");
    CompensatedSum sum, sum_sq;
    for (const auto &o : outcomes)
    {
        const double rate = o.sinr > gamma0 ? std::log2(1.0 + o.sinr) : 0.0;
        sum.add(rate);
        sum_sq.add(rate * rate);
    }
    const double n = static_cast<double>(outcomes.size());
    const double mean = sum.value() / n;
    const double var = n > 1 ? std::max(0.0, (sum_sq.value() - n * mean * mean) / (n - 1.0)) : 0.0;
    return {density * mean, density * 1.96 * std::sqrt(var / n)};
}

// Fraction of resampled (empty) realizations per accepted trial.
inline double resample_rate(const std::vector<TrialOutcome> &outcomes)
{
    std::size_t total = 0;
    for (const auto &o : outcomes)
        total += o.resamples;
    return outcomes.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(outcomes.size());
}

inline Estimate simulate_coverage(const TrialConfig &cfg, double gamma)
{
    if (cfg.trials < 100)
        throw std::invalid_argument("simulate_coverage: need at least 100 trials");
    return coverage_estimate(run_trials(cfg), gamma);
}

inline Estimate simulate_ase(const TrialConfig &cfg, double gamma0)
{
    if (cfg.trials < 100)
        throw std::invalid_argument("simulate_ase: need at least 100 trials");
    return ase_estimate(run_trials(cfg), cfg.params.density, gamma0);
}

} // namespace udn

#endif
