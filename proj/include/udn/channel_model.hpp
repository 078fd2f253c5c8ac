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

#ifndef UDN_CHANNEL_MODEL_HPP
#define UDN_CHANNEL_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "udn/units.hpp"

namespace udn
{

inline constexpr double infinity = std::numeric_limits<double>::infinity();

enum class LinkType
{
    los,
    nlos
};

inline const char *to_string(LinkType link) { return link == LinkType::los ? "LoS" : "NLoS"; }

// One piece of the piecewise path loss: zeta(w) = A * w^-alpha for d_{n-1} < w <= d_n.
// Amplitudes are linear gains at a 3D distance of 1 km.
struct PathLossPiece
{
    double upper_break_km = infinity;
    double los_amplitude = 1.0;
    double los_exponent = 2.0;
    double nlos_amplitude = 1.0;
    double nlos_exponent = 4.0;
};

// One piece of the LoS probability function Pr^L(w), w in km.
struct LosProbabilityPiece
{
    enum class Form
    {
        linear,
        constant,
        zero
    };

    double upper_break_km = infinity;
    Form form = Form::zero;
    double intercept = 0.0; // linear: value at w = 0; constant: the value
    double slope = 0.0;     // linear only, per km

    static LosProbabilityPiece linear(double upper_break_km, double intercept, double slope_per_km)
    {
        return {upper_break_km, Form::linear, intercept, slope_per_km};
    }
    static LosProbabilityPiece constant(double upper_break_km, double value)
    {
        return {upper_break_km, Form::constant, value, 0.0};
    }
    static LosProbabilityPiece zero(double upper_break_km) { return {upper_break_km, Form::zero, 0.0, 0.0}; }

    double value(double w_km) const
    {
        switch (form)
        {
        case Form::linear:
            return intercept + slope * w_km;
        case Form::constant:
            return intercept;
        case Form::zero:
            break;
        }
        return 0.0;
    }

    // Antiderivative of Pr(w) * w, used for the closed-form LoS "mass" of a disc.
    double weighted_antiderivative(double w_km) const
    {
        const double w2 = w_km * w_km;
        switch (form)
        {
        case Form::linear:
            return intercept * w2 / 2.0 + slope * w2 * w_km / 3.0;
        case Form::constant:
            return intercept * w2 / 2.0;
        case Form::zero:
            break;
        }
        return 0.0;
    }

    bool identically_zero() const { return form == Form::zero || (form == Form::constant && intercept == 0.0); }
    bool identically_one() const { return form == Form::constant && intercept == 1.0; }
};

// Piecewise LoS/NLoS path loss together with the piecewise LoS probability.
// Both piece lists share the same breakpoints d_1 < ... < d_N = +inf (km).
// Immutable after construction.
class PathLossModel
{
public:
    PathLossModel(std::vector<PathLossPiece> pieces, std::vector<LosProbabilityPiece> los_prob)
        : pieces_(std::move(pieces)), los_prob_(std::move(los_prob))
    {
        validate();
    }

    std::size_t piece_count() const { return pieces_.size(); }
    const std::vector<PathLossPiece> &pieces() const { return pieces_; }
    const std::vector<LosProbabilityPiece> &los_pieces() const { return los_prob_; }

    double upper_break(std::size_t n) const { return pieces_[n].upper_break_km; }
    double lower_break(std::size_t n) const { return n == 0 ? 0.0 : pieces_[n - 1].upper_break_km; }

    // Index n with d_{n-1} < w <= d_n. w = 0 maps to the first piece.
    std::size_t piece_index(double w_km) const
    {
        for (std::size_t n = 0; n + 1 < pieces_.size(); ++n)
            if (w_km <= pieces_[n].upper_break_km)
                return n;
        return pieces_.size() - 1;
    }

    double amplitude(LinkType link, std::size_t n) const
    {
        return link == LinkType::los ? pieces_[n].los_amplitude : pieces_[n].nlos_amplitude;
    }
    double exponent(LinkType link, std::size_t n) const
    {
        return link == LinkType::los ? pieces_[n].los_exponent : pieces_[n].nlos_exponent;
    }

    // Piece-n power law evaluated at w regardless of membership.
    double gain_in_piece(LinkType link, std::size_t n, double w_km) const
    {
        return amplitude(link, n) * std::pow(w_km, -exponent(link, n));
    }

    double gain(LinkType link, double w_km) const { return gain_in_piece(link, piece_index(w_km), w_km); }

    double los_probability_in_piece(std::size_t n, double w_km) const
    {
        return std::clamp(los_prob_[n].value(w_km), 0.0, 1.0);
    }

    double los_probability(double w_km) const { return los_probability_in_piece(piece_index(w_km), w_km); }

    // Integral of Pr^L(w) * w over [w_lo, w_hi], closed form per piece.
    double los_weighted_mass(double w_lo, double w_hi) const
    {
        if (!(w_hi > w_lo))
            return 0.0;
        double total = 0.0;
        for (std::size_t n = 0; n < pieces_.size(); ++n)
        {
            const double lo = std::max(w_lo, lower_break(n));
            const double hi = std::min(w_hi, upper_break(n));
            if (hi <= lo)
                continue;
            const auto &p = los_prob_[n];
            total += p.weighted_antiderivative(hi) - p.weighted_antiderivative(lo);
        }
        return total;
    }

    // True when Pr^L vanishes everywhere at or beyond w (LoS interferers have compact support).
    bool los_vanishes_beyond(double w_km) const
    {
        for (std::size_t n = piece_index(w_km); n < pieces_.size(); ++n)
            if (!los_prob_[n].identically_zero())
                return false;
        return true;
    }

private:
    void validate() const
    {
        if (pieces_.empty())
            throw std::invalid_argument("path loss model needs at least one piece");
        if (pieces_.size() != los_prob_.size())
            throw std::invalid_argument("path loss and LoS probability piece counts differ");
        double prev_break = 0.0;
        double prev_prob = 1.0;
        for (std::size_t n = 0; n < pieces_.size(); ++n)
        {
            const auto &p = pieces_[n];
            const auto &q = los_prob_[n];
            if (!(p.los_amplitude > 0.0 && p.nlos_amplitude > 0.0))
                throw std::invalid_argument("path loss amplitudes must be positive (piece " + std::to_string(n) + ")");
            if (!(p.los_exponent > 0.0 && p.nlos_exponent > 0.0))
                throw std::invalid_argument("path loss exponents must be positive (piece " + std::to_string(n) + ")");
            if (!(p.upper_break_km > prev_break))
                throw std::invalid_argument("breakpoints must be strictly increasing (piece " + std::to_string(n) + ")");
            if (p.upper_break_km != q.upper_break_km)
                throw std::invalid_argument("path loss and LoS probability breakpoints differ (piece " +
                                            std::to_string(n) + ")");
            if (q.form == LosProbabilityPiece::Form::linear && q.slope > 0.0)
                throw std::invalid_argument("LoS probability must be non-increasing (piece " + std::to_string(n) +
                                            ")");
            const double at_lo = q.value(prev_break);
            const double at_hi = std::isinf(p.upper_break_km)
                                     ? (q.form == LosProbabilityPiece::Form::linear && q.slope < 0.0 ? -infinity
                                                                                                      : q.value(0.0))
                                     : q.value(p.upper_break_km);
            constexpr double slack = 1e-12;
            if (at_lo > 1.0 + slack || at_hi < -slack)
                throw std::invalid_argument("LoS probability leaves [0,1] (piece " + std::to_string(n) + ")");
            if (at_lo > prev_prob + slack)
                throw std::invalid_argument("LoS probability increases across breakpoint (piece " +
                                            std::to_string(n) + ")");
            prev_prob = at_hi;
            prev_break = p.upper_break_km;
        }
        if (!std::isinf(pieces_.back().upper_break_km))
            throw std::invalid_argument("last breakpoint must be +inf");
    }

    std::vector<PathLossPiece> pieces_;
    std::vector<LosProbabilityPiece> los_prob_;
};

// Linear gain A_n * w^-alpha_n of the piece containing w.
inline double path_loss(const PathLossModel &model, LinkType link, double w_km)
{
    if (!(w_km > 0.0))
        throw std::domain_error("path_loss: distance must be positive");
    return model.gain(link, w_km);
}

inline double los_probability(const PathLossModel &model, double w_km)
{
    if (!(w_km > 0.0))
        throw std::domain_error("los_probability: distance must be positive");
    return model.los_probability(w_km);
}

namespace case1
{
inline constexpr double los_break_km = 0.3;
inline constexpr double los_exponent = 2.09;
inline constexpr double nlos_exponent = 3.75;
inline const double los_amplitude = std::pow(10.0, -10.38);
inline const double nlos_amplitude = std::pow(10.0, -14.54);
} // namespace case1

// 3GPP Case 1: one LoS and one NLoS power law over two pieces; Pr^L(w) = 1 - w/d_1 up
// to d_1 = 300 m and zero beyond. The split only carries the LoS probability form.
inline PathLossModel preset_3gpp_case1(double los_exponent = case1::los_exponent)
{
    const PathLossPiece near{case1::los_break_km, case1::los_amplitude, los_exponent, case1::nlos_amplitude,
                             case1::nlos_exponent};
    PathLossPiece far = near;
    far.upper_break_km = infinity;
    return PathLossModel({near, far}, {LosProbabilityPiece::linear(case1::los_break_km, 1.0, -1.0 / case1::los_break_km),
                                       LosProbabilityPiece::zero(infinity)});
}

// Single power law that treats every link as NLoS.
inline PathLossModel preset_single_slope(double amplitude = case1::nlos_amplitude,
                                         double exponent = case1::nlos_exponent)
{
    if (!(amplitude > 0.0 && exponent > 0.0))
        throw std::invalid_argument("single-slope amplitude and exponent must be positive");
    return PathLossModel({PathLossPiece{infinity, amplitude, exponent, amplitude, exponent}},
                         {LosProbabilityPiece::zero(infinity)});
}

struct FadingKind
{
    enum class Tag
    {
        rayleigh,
        rician
    };

    Tag tag = Tag::rayleigh;
    double k_intercept_db = 13.0;
    double k_slope_db_per_m = -0.03;

    static FadingKind rayleigh() { return {}; }
    static FadingKind rician(double intercept_db = 13.0, double slope_db_per_m = -0.03)
    {
        return {Tag::rician, intercept_db, slope_db_per_m};
    }

    bool is_rayleigh() const { return tag == Tag::rayleigh; }
};

inline const char *to_string(FadingKind::Tag tag) { return tag == FadingKind::Tag::rayleigh ? "rayleigh" : "rician"; }

// Linear Rician K factor at 3D distance w (km); K[dB] = intercept + slope * w[m].
inline double rician_k_factor(const FadingKind &kind, double w_km)
{
    const double k_db = kind.k_intercept_db + kind.k_slope_db_per_m * km_to_m(w_km);
    return std::max(0.0, db_to_linear(k_db));
}

// Unit-mean power gain of one link.
template <class Rng>
double sample_fading(const FadingKind &kind, double w_km, Rng &rng)
{
    if (kind.is_rayleigh())
    {
        std::exponential_distribution<double> exp1(1.0);
        return exp1(rng);
    }
    if (!(w_km > 0.0))
        throw std::domain_error("sample_fading: Rician fading needs a positive distance");
    const double k = rician_k_factor(kind, w_km);
    if (std::isinf(k))
        return 1.0;
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const std::complex<double> z(normal(rng), normal(rng));
    const std::complex<double> h = std::sqrt(k / (k + 1.0)) + std::sqrt(1.0 / (k + 1.0)) * z;
    return std::norm(h);
}

} // namespace udn

#endif
