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


#include <cmath>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "udn/analytic.hpp"

using namespace udn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
const double a_los = std::pow(10.0, -10.38);
const double a_nlos = std::pow(10.0, -14.54);

NetworkParams params_at(double density, double L_km, double noise_mw = dbm_to_mw(-95.0))
{
    NetworkParams p;
    p.density = density;
    p.height_diff_km = L_km;
    p.noise_mw = noise_mw;
    return p;
}

PathLossModel identical_laws()
{
    return PathLossModel({{infinity, 1e-12, 3.0, 1e-12, 3.0}}, {LosProbabilityPiece::constant(infinity, 0.5)});
}

double bisect(const std::function<double(double)> &g, double lo, double hi)
{
    for (int i = 0; i < 200; ++i)
    {
        const double mid = 0.5 * (lo + hi);
        (std::signbit(g(mid)) == std::signbit(g(lo)) ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}
} // namespace

TEST_CASE("equivalent distance r1")
{
    const auto m = preset_3gpp_case1();
    const double closed = std::pow(a_nlos / a_los, 1.0 / 3.75) * std::pow(0.1, 2.09 / 3.75);
    CHECK_THAT(equivalent_distance_r1(m, 0, 0.1, 0.0), WithinRel(closed, 1e-10));
    CHECK_THAT(equivalent_distance_r1(m, 0, 0.1, 0.0), WithinRel(0.021546, 1e-4));

    for (double r : {0.01, 0.2, 1.0})
        for (double L : {0.0, 0.0035, 0.0085})
            CHECK_THAT(equivalent_distance_r1(identical_laws(), 0, r, L), WithinRel(r, 1e-9));

    // Small r with L = 8.5 m: the NLoS-equivalent 3D distance is below L, so r1 clamps to 0.
    const double L = 0.0085;
    const double w1 = std::pow(a_nlos / a_los, 1.0 / 3.75) * std::pow(L, 2.09 / 3.75);
    REQUIRE(w1 < L);
    CHECK(equivalent_distance_r1(m, 0, 1e-6, L) == 0.0);
    CHECK(equivalent_distance_r1(m, 0, 0.0, L) == 0.0);
}

TEST_CASE("equivalent distance r2")
{
    const auto m = preset_3gpp_case1();
    CHECK_THAT(equivalent_distance_r2(m, 0, 0.021546, 0.0), WithinRel(0.1, 3e-4));
    for (double r : {0.01, 0.2, 1.0})
        CHECK_THAT(equivalent_distance_r2(identical_laws(), 0, r, 0.004), WithinRel(r, 1e-9));

    const double target = a_nlos * std::pow(0.05, -3.75);
    const double oracle = bisect([&](double w) { return a_los * std::pow(w, -2.09) - target; }, 1e-3, 1e6);
    CHECK_THAT(equivalent_distance_r2(m, 0, 0.05, 0.0), WithinRel(oracle, 1e-9));
    CHECK_THAT(oracle, WithinRel(std::pow(a_los / a_nlos, 1.0 / 2.09) * std::pow(0.05, 3.75 / 2.09), 1e-9));

    for (double r : {0.003, 0.05, 0.2})
    {
        const double r1 = equivalent_distance_r1(m, 0, r, 0.0);
        CHECK_THAT(equivalent_distance_r2(m, 0, r1, 0.0), WithinRel(r, 1e-8));
    }
}

TEST_CASE("serving distance densities")
{
    const auto m = preset_3gpp_case1();
    const auto p = params_at(100.0, 0.0085);
    CHECK(distance_pdf_los(m, p, 0, 0.0) == 0.0);
    CHECK(distance_pdf_nlos(m, p, 0, 0.0) == 0.0);
    CHECK(distance_pdf_los(m, p, 0, 1e-9) < 1e-5);
    // Beyond the LoS break, no LoS serving link exists.
    const double edge = std::sqrt(0.3 * 0.3 - 0.0085 * 0.0085);
    for (double r : {edge + 1e-6, 0.5, 2.0})
        CHECK(distance_pdf_los(m, p, 1, r) == 0.0);

    const PathLossModel all_los({{infinity, 1e-10, 2.09, 1e-14, 3.75}}, {LosProbabilityPiece::constant(infinity, 1.0)});
    for (double r : {0.001, 0.05, 0.5})
        CHECK(distance_pdf_nlos(all_los, p, 0, r) == 0.0);
}

TEST_CASE("serving distance densities are normalized")
{
    const QuadratureSpec spec;
    for (const auto &m : {preset_3gpp_case1(), preset_single_slope(), preset_3gpp_case1(1.09)})
        for (double density : {1.0, 100.0, 1e4})
            for (double L : {0.0, 0.0035, 0.0085})
            {
                const auto p = params_at(density, L);
                double total = 0.0;
                for (std::size_t n = 0; n < m.piece_count(); ++n)
                {
                    const double lo = detail::to_2d(std::max(m.lower_break(n), L), L);
                    const double hi = std::isinf(m.upper_break(n)) ? infinity : detail::to_2d(m.upper_break(n), L);
                    if (hi <= lo)
                        continue;
                    auto f = [&](double r) {
                        return distance_pdf_los(m, p, n, r, spec) + distance_pdf_nlos(m, p, n, r, spec);
                    };
                    total += std::isinf(hi) ? integrate_to_infinity(f, lo, spec, TailStrategy::mapped,
                                                                    std::max(lo, 1.0 / std::sqrt(density)))
                                            : integrate(f, lo, hi, spec);
                }
                INFO("density=" << density << " L=" << L);
                CHECK_THAT(total, WithinAbs(1.0, 1e-4));
            }
}

TEST_CASE("Laplace transform basics")
{
    const auto m = preset_3gpp_case1();
    const auto p = params_at(100.0, 0.0085);
    CHECK(laplace_los(m, p, 0.05, 0.0) == 1.0);
    CHECK(laplace_nlos(m, p, 0.05, 0.0) == 1.0);

    const auto sparse = params_at(1e-9, 0.0085);
    const double s = 1.0 / (p.tx_power_mw * path_loss(m, LinkType::los, 0.05));
    CHECK_THAT(laplace_los(m, sparse, 0.05, s), WithinAbs(1.0, 1e-6));
    CHECK_THAT(laplace_nlos(m, sparse, 0.05, s), WithinAbs(1.0, 1e-6));

    for (double r : {0.01, 0.05, 0.2, 0.6})
    {
        double prev_l = 1.0, prev_n = 1.0;
        for (double k = 1e-3; k < 1e4; k *= 3.0)
        {
            const double l = laplace_los(m, p, r, k * s);
            const double n = laplace_nlos(m, p, r, k * s);
            CHECK(l > 0.0);
            CHECK(l <= prev_l);
            CHECK(n > 0.0);
            CHECK(n <= prev_n);
            prev_l = l;
            prev_n = n;
        }
    }
}

TEST_CASE("Laplace transform matches a Monte Carlo interference-field oracle")
{
    // Interferers: HPPP in a 3 km disc, independent LoS states, Rayleigh fading, restricted
    // to BSs whose path loss is weaker than the serving link's.
    const auto m = preset_3gpp_case1();
    const double L = 0.0085, density = 100.0, r = 0.05, R = 3.0;
    const auto p = params_at(density, L);

    for (const LinkType serving : {LinkType::los, LinkType::nlos})
    {
        const double w = std::sqrt(r * r + L * L);
        const double zeta = path_loss(m, serving, w);
        const double s = 1.0 / (p.tx_power_mw * zeta);
        const double analytic =
            serving == LinkType::los ? laplace_los(m, p, r, s) : laplace_nlos(m, p, r, s);

        std::mt19937_64 rng(serving == LinkType::los ? 101 : 202);
        std::poisson_distribution<int> count(density * pi * R * R);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::exponential_distribution<double> fade(1.0);
        const int trials = 10000;
        double sum = 0.0, sum2 = 0.0;
        for (int t = 0; t < trials; ++t)
        {
            double interference = 0.0;
            const int k = count(rng);
            for (int i = 0; i < k; ++i)
            {
                const double ri = R * std::sqrt(u(rng));
                const double wi = std::sqrt(ri * ri + L * L);
                const bool los = u(rng) < std::max(0.0, 1.0 - wi / 0.3);
                const double gi = los ? a_los * std::pow(wi, -2.09) : a_nlos * std::pow(wi, -3.75);
                if (gi < zeta)
                    interference += p.tx_power_mw * gi * fade(rng);
            }
            const double v = std::exp(-s * interference);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / trials;
        const double se = std::sqrt((sum2 / trials - mean * mean) / trials);
        INFO("serving=" << to_string(serving) << " analytic=" << analytic << " mc=" << mean << " se=" << se);
        CHECK(std::abs(analytic - mean) <= 3.0 * se);
    }
}

TEST_CASE("coverage at lambda = 1e4")
{
    const auto m = preset_3gpp_case1();
    CHECK_THAT(coverage_probability(m, params_at(1e4, 0.0), 1.0), WithinRel(0.15, 0.1));
    const double crashed = coverage_probability(m, params_at(1e4, 0.0085), 1.0);
    CHECK(crashed <= 1e-4);
    CHECK(crashed >= 1e-6);
}

TEST_CASE("coverage: single-slope closed form")
{
    const auto m = preset_single_slope(1e-14, 4.0);
    const double closed = 1.0 / (1.0 + pi / 4.0);
    const double p2 = coverage_probability(m, params_at(1e2, 0.0, 0.0), 1.0);
    const double p4 = coverage_probability(m, params_at(1e4, 0.0, 0.0), 1.0);
    CHECK_THAT(p2, WithinAbs(closed, 1e-6));
    CHECK_THAT(p4, WithinAbs(closed, 1e-6));
    CHECK_THAT(p2, WithinAbs(p4, 1e-3));
}

TEST_CASE("coverage decreases with density when L > 0")
{
    const auto m = preset_3gpp_case1();
    const double p2 = coverage_probability(m, params_at(1e2, 0.0085), 1.0);
    const double p3 = coverage_probability(m, params_at(1e3, 0.0085), 1.0);
    const double p5 = coverage_probability(m, params_at(1e5, 0.0085), 1.0);
    CHECK(p5 < p3);
    CHECK(p3 < p2);
}

TEST_CASE("coverage: errors")
{
    const auto m = preset_3gpp_case1();
    CHECK_THROWS_AS(coverage_probability(m, params_at(100.0, 0.0), 0.0), std::domain_error);
    auto rician = params_at(100.0, 0.0);
    rician.fading = FadingKind::rician();
    CHECK_THROWS_AS(coverage_probability(m, rician, 1.0), std::invalid_argument);
    CHECK_THROWS(coverage_probability(m, params_at(-1.0, 0.0), 1.0));
    CHECK_THROWS(coverage_probability(m, params_at(100.0, -0.001), 1.0));
}

TEST_CASE("SINR CCDF is a non-increasing curve in [0, 1]")
{
    const auto m = preset_3gpp_case1();
    std::vector<double> grid;
    for (double g = 1e-4; g <= 1e7; g *= 3.0)
        grid.push_back(g);
    for (double L : {0.0, 0.0085})
    {
        const auto curve = sinr_ccdf_curve(m, params_at(300.0, L), grid);
        REQUIRE(curve.size() == grid.size());
        for (std::size_t i = 0; i < curve.size(); ++i)
        {
            CHECK(curve[i].p_cov >= 0.0);
            CHECK(curve[i].p_cov <= 1.0);
            if (i > 0)
                CHECK(curve[i].p_cov <= curve[i - 1].p_cov + 1e-7);
        }
        CHECK(curve.front().p_cov > 0.99);
        CHECK(curve.back().p_cov < 1e-2);
    }
    CHECK_THROWS_AS(sinr_ccdf_curve(m, params_at(300.0, 0.0), {1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("ASE vanishes as density goes to zero")
{
    const auto m = preset_3gpp_case1();
    const double a = ase(m, params_at(1e-6, 0.0), 1.0);
    CHECK(a >= 0.0);
    CHECK(a < 1e-4);
}

TEST_CASE("ASE by parts matches the derivative form")
{
    struct Spot
    {
        PathLossModel model;
        double density;
        double L;
    };
    const std::vector<Spot> spots = {{preset_3gpp_case1(), 100.0, 0.0},
                                     {preset_3gpp_case1(), 1000.0, 0.0085},
                                     {preset_single_slope(), 10.0, 0.0}};
    for (const auto &spot : spots)
    {
        const auto p = params_at(spot.density, spot.L);
        const double by_parts = ase(spot.model, p, 1.0);

        // lambda * int log2(1+g) (-dp/dg) dg on a log grid, with central differences of p.
        const int per_decade = 48;
        const double t0 = 0.0, t1 = std::log(1e8);
        const int n = static_cast<int>(per_decade * (t1 - t0) / std::log(10.0));
        const double h = (t1 - t0) / n;
        std::vector<double> pc(n + 1);
        for (int i = 0; i <= n; ++i)
            pc[i] = coverage_probability(spot.model, p, std::exp(t0 + h * i));
        double integral = 0.0;
        for (int i = 0; i <= n; ++i)
        {
            double dp;
            if (i == 0)
                dp = (pc[1] - pc[0]) / h;
            else if (i == n)
                dp = (pc[n] - pc[n - 1]) / h;
            else
                dp = (pc[i + 1] - pc[i - 1]) / (2.0 * h);
            const double weight = (i == 0 || i == n) ? 0.5 : 1.0;
            integral += weight * h * std::log2(1.0 + std::exp(t0 + h * i)) * (-dp);
        }
        const double by_derivative = spot.density * (integral + std::log2(1.0 + 1e8) * pc[n]);
        INFO("density=" << spot.density << " L=" << spot.L << " parts=" << by_parts << " deriv=" << by_derivative);
        CHECK_THAT(by_derivative, WithinRel(by_parts, 0.005));
    }
}

TEST_CASE("two-BS toy network SIR")
{
    CHECK(toy_sir(0.0, 0.0085, 10.0, 2.0) == 1.0);
    CHECK_THAT(toy_sir(1e-9, 0.0085, 10.0, 2.0), WithinAbs(1.0, 1e-9));
    for (double r : {1e-3, 0.1, 5.0})
        CHECK(toy_sir(r, 0.0, 10.0, 2.0) == std::pow(10.0, 2.0));
    CHECK_THAT(toy_sir(0.0085, 0.0085, 10.0, 2.0), WithinRel(50.5, 1e-12));
    CHECK_THROWS_AS(toy_sir(0.0, 0.0, 10.0, 2.0), std::domain_error);
    CHECK_THROWS_AS(toy_sir(0.1, 0.0, 0.5, 2.0), std::domain_error);
}
