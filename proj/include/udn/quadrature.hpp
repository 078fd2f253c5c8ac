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

#ifndef UDN_QUADRATURE_HPP
#define UDN_QUADRATURE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace udn
{

struct QuadratureSpec
{
    double rel_tol = 1e-8;
    double abs_tol = 1e-12;
    int max_depth = 50;             // bisection depth cap of any single subinterval
    int max_subdivisions = 2000;    // total interval budget per call
    double tail_cut = 1e-10;        // panel-doubling stop: panel < tail_cut * |running total|

    void validate() const
    {
        if (!(rel_tol > 0.0 && abs_tol > 0.0 && tail_cut > 0.0))
            throw std::invalid_argument("quadrature tolerances must be positive");
        if (max_depth < 1 || max_subdivisions < 1)
            throw std::invalid_argument("quadrature max_depth and max_subdivisions must be >= 1");
    }
};

class QuadratureError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Adaptive integration gave up; carries the best estimate available.
class ConvergenceError : public QuadratureError
{
public:
    ConvergenceError(const std::string &what, double estimate, double error_bound)
        : QuadratureError(what), estimate_(estimate), error_bound_(error_bound)
    {
    }
    double estimate() const { return estimate_; }
    double error_bound() const { return error_bound_; }

private:
    double estimate_;
    double error_bound_;
};

class DivergenceError : public QuadratureError
{
public:
    using QuadratureError::QuadratureError;
};

class BracketError : public QuadratureError
{
public:
    using QuadratureError::QuadratureError;
};

namespace detail
{

struct Segment
{
    double a;
    double b;
    double value;
    double error;
    int depth;

    bool operator<(const Segment &other) const { return error < other.error; }
};

// 15-point Gauss-Kronrod rule with the embedded 7-point Gauss rule and the
// QUADPACK error heuristic.
template <class F>
Segment gauss_kronrod_15(const F &f, double a, double b, int depth)
{
    static constexpr std::array<double, 8> xgk = {
        0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
        0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
        0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
        0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
    static constexpr std::array<double, 8> wgk = {
        0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
        0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
        0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
        0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
    static constexpr std::array<double, 4> wg = {
        0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
        0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = static_cast<double>(f(center));
    double resg = fc * wg[3];
    double resk = fc * wgk[7];
    double resabs = std::abs(resk);
    std::array<double, 7> fv1{}, fv2{};
    for (int j = 0; j < 7; ++j)
    {
        const double dx = half * xgk[j];
        const double f1 = static_cast<double>(f(center - dx));
        const double f2 = static_cast<double>(f(center + dx));
        fv1[j] = f1;
        fv2[j] = f2;
        resk += wgk[j] * (f1 + f2);
        resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
        if (j % 2 == 1)
            resg += wg[j / 2] * (f1 + f2);
    }
    const double reskh = resk * 0.5;
    double resasc = wgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j)
        resasc += wgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));

    const double result = resk * half;
    resabs *= std::abs(half);
    resasc *= std::abs(half);
    double err = std::abs((resk - resg) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps))
        err = std::max(50.0 * eps * resabs, err);
    return {a, b, result, err, depth};
}

} // namespace detail

// Globally adaptive Gauss-Kronrod on [a, b]: the interval with the largest error
// estimate is bisected until the summed error meets max(abs_tol, rel_tol * |I|).
// The rule runs on t in [0, 1] with x = a + (b - a)(3t^2 - 2t^3), which removes
// inverse-square-root endpoint singularities and leaves smooth integrands smooth.
template <class F>
double integrate(const F &f, double a, double b, const QuadratureSpec &spec = {})
{
    if (!(a <= b))
        throw std::invalid_argument("integrate: need a <= b");
    if (a == b)
        return 0.0;

    const double width = b - a;
    auto g = [&](double t) {
        const double s = 1.0 - t;
        const double jacobian = 6.0 * t * s * width;
        if (jacobian == 0.0)
            return 0.0;
        const double x = t < 0.5 ? a + width * t * t * (3.0 - 2.0 * t) : b - width * s * s * (3.0 - 2.0 * s);
        return static_cast<double>(f(x)) * jacobian;
    };

    std::priority_queue<detail::Segment> heap;
    auto first = detail::gauss_kronrod_15(g, 0.0, 1.0, 0);
    double total = first.value;
    double total_err = first.error;
    heap.push(first);

    int subdivisions = 0;
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total)))
    {
        if (!std::isfinite(total))
            throw ConvergenceError("integrate: non-finite integrand", total, total_err);
        const auto worst = heap.top();
        if (worst.depth >= spec.max_depth || subdivisions >= spec.max_subdivisions)
            throw ConvergenceError("integrate: " + std::string(worst.depth >= spec.max_depth ? "max_depth"
                                                                                              : "max_subdivisions") +
                                       " exceeded on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                                   total, total_err);
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        const auto left = detail::gauss_kronrod_15(g, worst.a, mid, worst.depth + 1);
        const auto right = detail::gauss_kronrod_15(g, mid, worst.b, worst.depth + 1);
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++subdivisions;
    }

    // Re-sum to shed accumulated cancellation from the running updates.
    double sum = 0.0;
    while (!heap.empty())
    {
        sum += heap.top().value;
        heap.pop();
    }
    return sum;
}

enum class TailStrategy
{
    mapped,        // u = a + scale * t / (1 - t), adaptive on t in [0, 1)
    panel_doubling // panels of doubling width until a panel is negligible
};

// Integral of an eventually decaying f over [a, +inf). `scale` is the length
// over which f changes appreciably near a; it only affects efficiency.
template <class F>
double integrate_to_infinity(const F &f, double a, const QuadratureSpec &spec = {},
                             TailStrategy strategy = TailStrategy::mapped, double scale = 1.0)
{
    if (!std::isfinite(a))
        throw std::invalid_argument("integrate_to_infinity: lower limit must be finite");
    if (!(scale > 0.0))
        throw std::invalid_argument("integrate_to_infinity: scale must be positive");

    // u * |f(u)| must shrink far out, otherwise the integral cannot converge.
    {
        const double near_probe = a + scale * 1e3;
        const double far_probe = a + scale * 1e6;
        const double g_near = std::abs(near_probe * static_cast<double>(f(near_probe)));
        const double g_far = std::abs(far_probe * static_cast<double>(f(far_probe)));
        if (!std::isfinite(g_far) || (g_far > 0.0 && g_far >= 0.5 * g_near))
            throw DivergenceError("integrate_to_infinity: integrand does not decay faster than 1/u");
    }

    if (strategy == TailStrategy::mapped)
    {
        auto mapped = [&](double t) {
            const double one_minus = 1.0 - t;
            const double u = a + scale * t / one_minus;
            const double value = static_cast<double>(f(u));
            if (value == 0.0)
                return 0.0;
            return value * scale / (one_minus * one_minus);
        };
        return integrate(mapped, 0.0, 1.0, spec);
    }

    constexpr int max_panels = 200;
    QuadratureSpec panel_spec = spec;
    double total = 0.0;
    double lo = a;
    double width = scale;
    double prev_contribution = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int k = 0; k < max_panels; ++k)
    {
        const double hi = lo + width;
        const double c = integrate(f, lo, hi, panel_spec);
        total += c;
        if (std::abs(c) <= spec.tail_cut * std::abs(total) || (total == 0.0 && c == 0.0 && k > 8))
            return total;
        stalled = std::abs(c) >= 0.95 * prev_contribution ? stalled + 1 : 0;
        if (stalled >= 4 && k > 8)
            throw DivergenceError("integrate_to_infinity: panel contributions are not shrinking");
        prev_contribution = std::abs(c);
        lo = hi;
        width *= 2.0;
    }
    throw DivergenceError("integrate_to_infinity: panel budget exhausted before the tail became negligible");
}

// Root of a continuous monotone g on [lo, hi] by Illinois-modified regula falsi with
// bisection fallback; stops when the bracket is narrower than abs_tol.
template <class G>
double solve_monotone_root(const G &g, double lo, double hi, const QuadratureSpec &spec = {})
{
    if (!(lo <= hi))
        throw std::invalid_argument("solve_monotone_root: need lo <= hi");
    double g_lo = g(lo);
    double g_hi = g(hi);
    if (g_lo == 0.0)
        return lo;
    if (g_hi == 0.0)
        return hi;
    if (std::signbit(g_lo) == std::signbit(g_hi))
        throw BracketError("solve_monotone_root: no sign change on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");

    int side = 0;
    for (int iter = 0; iter < 400 && hi - lo > spec.abs_tol; ++iter)
    {
        double x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        // Fall back to bisection every few steps or when the secant leaves the bracket.
        if (!(x > lo && x < hi) || iter % 4 == 3)
            x = 0.5 * (lo + hi);
        const double gx = g(x);
        if (gx == 0.0)
            return x;
        if (std::signbit(gx) == std::signbit(g_lo))
        {
            lo = x;
            g_lo = gx;
            if (side == -1)
                g_hi *= 0.5;
            side = -1;
        }
        else
        {
            hi = x;
            g_hi = gx;
            if (side == 1)
                g_lo *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace udn

#endif
