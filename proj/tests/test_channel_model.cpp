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

#include "udn/channel_model.hpp"
#include "udn/units.hpp"

using namespace udn;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("3GPP Case 1 path loss at the reference distance")
{
    const auto m = preset_3gpp_case1();
    CHECK_THAT(path_loss(m, LinkType::los, 1.0), WithinRel(4.169e-11, 1e-3));
    CHECK_THAT(path_loss(m, LinkType::nlos, 1.0), WithinRel(2.884e-15, 1e-3));
    CHECK_THAT(path_loss(m, LinkType::los, 1.0), WithinRel(std::pow(10.0, -10.38), 1e-14));
    CHECK_THAT(path_loss(m, LinkType::los, 0.3), WithinRel(5.183e-10, 5e-3));
}

TEST_CASE("3GPP Case 1 LoS probability")
{
    const auto m = preset_3gpp_case1();
    CHECK_THAT(los_probability(m, 0.15), WithinAbs(0.5, 1e-15));
    CHECK(los_probability(m, 0.45) == 0.0);
    CHECK(los_probability(m, 0.3) == 0.0);
    CHECK_THAT(los_probability(m, 1e-12), WithinAbs(1.0, 1e-9));
    for (double w : {0.01, 0.1, 0.2, 0.29, 0.31, 1.0, 5.0})
        CHECK_THAT(los_probability(m, w), WithinAbs(std::max(0.0, 1.0 - w / 0.3), 1e-15));
}

TEST_CASE("preset structure")
{
    const auto m = preset_3gpp_case1();
    REQUIRE(m.piece_count() == 2);
    CHECK(m.upper_break(0) == 0.3);
    CHECK(std::isinf(m.upper_break(1)));
    CHECK(m.piece_index(0.3) == 0);
    CHECK(m.piece_index(0.3000001) == 1);
    for (std::size_t n = 0; n < 2; ++n)
    {
        CHECK(m.exponent(LinkType::los, n) == 2.09);
        CHECK(m.exponent(LinkType::nlos, n) == 3.75);
    }

    const auto s = preset_single_slope(std::pow(10.0, -14.54), 3.75);
    REQUIRE(s.piece_count() == 1);
    for (double w : {0.001, 0.5, 2.0, 100.0})
        CHECK(los_probability(s, w) == 0.0);
    CHECK_THAT(path_loss(s, LinkType::nlos, 2.0), WithinRel(std::pow(10.0, -14.54) * std::pow(2.0, -3.75), 1e-14));
    CHECK_THAT(path_loss(s, LinkType::nlos, 1.0), WithinRel(std::pow(10.0, -14.54), 1e-14));
    CHECK_THROWS_AS(preset_single_slope(-1.0, 3.75), std::invalid_argument);
}

TEST_CASE("domain errors")
{
    const auto m = preset_3gpp_case1();
    CHECK_THROWS_AS(path_loss(m, LinkType::los, 0.0), std::domain_error);
    CHECK_THROWS_AS(path_loss(m, LinkType::nlos, -1.0), std::domain_error);
    CHECK_THROWS_AS(los_probability(m, 0.0), std::domain_error);
}

TEST_CASE("model validation")
{
    using P = LosProbabilityPiece;
    const PathLossPiece good{infinity, 1e-10, 2.0, 1e-14, 3.75};
    CHECK_NOTHROW(PathLossModel({good}, {P::zero(infinity)}));
    CHECK_THROWS(PathLossModel({{infinity, -1.0, 2.0, 1e-14, 3.75}}, {P::zero(infinity)}));
    CHECK_THROWS(PathLossModel({{infinity, 1e-10, 0.0, 1e-14, 3.75}}, {P::zero(infinity)}));
    CHECK_THROWS(PathLossModel({{1.0, 1e-10, 2.0, 1e-14, 3.75}}, {P::zero(1.0)}));
    CHECK_THROWS(PathLossModel({{0.5, 1e-10, 2.0, 1e-14, 3.75}, {0.2, 1e-10, 2.0, 1e-14, 3.75}, good},
                               {P::zero(0.5), P::zero(0.2), P::zero(infinity)}));
    CHECK_THROWS(PathLossModel({{0.5, 1e-10, 2.0, 1e-14, 3.75}, good}, {P::zero(0.4), P::zero(infinity)}));
    // LoS probability increasing across a break.
    CHECK_THROWS(PathLossModel({{0.5, 1e-10, 2.0, 1e-14, 3.75}, good},
                               {P::constant(0.5, 0.2), P::constant(infinity, 0.6)}));
    CHECK_THROWS(PathLossModel({good}, {P::constant(infinity, 1.5)}));
}

TEST_CASE("LoS probability is bounded and non-increasing on a dense grid")
{
    for (const auto &m : {preset_3gpp_case1(), preset_3gpp_case1(1.09), preset_single_slope()})
    {
        double prev = 1.0;
        for (int i = 1; i <= 10000; ++i)
        {
            const double w = 10.0 * i / 10000.0;
            const double p = los_probability(m, w);
            REQUIRE(p >= 0.0);
            REQUIRE(p <= 1.0);
            REQUIRE(p <= prev);
            prev = p;
        }
    }
}

TEST_CASE("path loss strictly decreasing within each piece")
{
    const auto m = preset_3gpp_case1();
    for (const LinkType link : {LinkType::los, LinkType::nlos})
    {
        double prev = path_loss(m, link, 1e-4);
        for (int i = 2; i <= 10000; ++i)
        {
            const double g = path_loss(m, link, 1e-4 * i);
            REQUIRE(g < prev);
            prev = g;
        }
    }
}

TEST_CASE("LoS weighted mass matches the direct integral")
{
    const auto m = preset_3gpp_case1();
    // int_0^w (1 - u/0.3) u du for w <= 0.3
    auto exact = [](double w) { return w * w / 2.0 - w * w * w / 0.9; };
    CHECK_THAT(m.los_weighted_mass(0.0, 0.1), WithinRel(exact(0.1), 1e-13));
    CHECK_THAT(m.los_weighted_mass(0.05, 0.2), WithinRel(exact(0.2) - exact(0.05), 1e-12));
    CHECK_THAT(m.los_weighted_mass(0.0, 5.0), WithinRel(exact(0.3), 1e-12));
    CHECK(m.los_weighted_mass(0.4, 3.0) == 0.0);
}

TEST_CASE("Rician K factor")
{
    const auto k = FadingKind::rician();
    CHECK_THAT(linear_to_db(rician_k_factor(k, 0.1)), WithinAbs(10.0, 1e-12));
    CHECK_THAT(linear_to_db(rician_k_factor(k, 0.0)), WithinAbs(13.0, 1e-12));
    // Negative in dB beyond 433.3 m but still a valid positive linear ratio.
    CHECK(rician_k_factor(k, 0.6) > 0.0);
    CHECK(rician_k_factor(k, 0.6) < 1.0);
}

namespace
{
struct Moments
{
    double mean;
    double var;
};

Moments sample(const FadingKind &kind, double w, int n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i)
    {
        const double g = sample_fading(kind, w, rng);
        REQUIRE(g > 0.0);
        s += g;
        s2 += g * g;
    }
    const double mean = s / n;
    return {mean, s2 / n - mean * mean};
}
} // namespace

TEST_CASE("fading gains have unit mean")
{
    const auto ray = sample(FadingKind::rayleigh(), 0.1, 1000000, 11);
    CHECK_THAT(ray.mean, WithinAbs(1.0, 0.01));
    for (double w : {0.01, 0.1, 0.3, 0.6})
    {
        const int n = 200000;
        const auto r = sample(FadingKind::rician(), w, n, 17);
        CHECK(std::abs(r.mean - 1.0) <= 3.0 * std::sqrt(r.var / n));
        const auto e = sample(FadingKind::rayleigh(), w, n, 19);
        CHECK(std::abs(e.mean - 1.0) <= 3.0 * std::sqrt(e.var / n));
    }
}

TEST_CASE("Rician fading is less random than Rayleigh when K > 0 dB")
{
    for (double w : {0.01, 0.1, 0.3})
    {
        const auto ric = sample(FadingKind::rician(), w, 200000, 23);
        const auto ray = sample(FadingKind::rayleigh(), w, 200000, 29);
        CHECK(ric.var < ray.var);
    }
}

TEST_CASE("Rician with infinite K is deterministic")
{
    std::mt19937_64 rng(3);
    const FadingKind pure = FadingKind::rician(std::numeric_limits<double>::infinity(), 0.0);
    for (int i = 0; i < 10; ++i)
        CHECK(sample_fading(pure, 0.1, rng) == 1.0);
}

TEST_CASE("unit conversions")
{
    CHECK_THAT(dbm_to_mw(24.0), WithinRel(251.188643, 1e-8));
    CHECK_THAT(dbm_to_mw(-95.0), WithinRel(3.16227766e-10, 1e-8));
    CHECK_THAT(mw_to_dbm(dbm_to_mw(13.7)), WithinAbs(13.7, 1e-12));
    CHECK(m_to_km(8.5) == 0.0085);
}
