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

// Declarative density sweeps: JSON scenario configs, a deterministic parallel
// runner over (curve, lambda, engine) points, and CSV/JSON result tables.

#ifndef UDN_SWEEP_HPP
#define UDN_SWEEP_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "udn/analytic.hpp"
#include "udn/channel_model.hpp"
#include "udn/hppp_sim.hpp"
#include "udn/quadrature.hpp"
#include "udn/units.hpp"

namespace udn
{

class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string &key, const std::string &why)
        : std::runtime_error("config key '" + key + "': " + why), key_(key)
    {
    }
    const std::string &key() const { return key_; }

private:
    std::string key_;
};

enum class Metric
{
    coverage,
    ase
};

enum class Format
{
    csv,
    json
};

struct EngineSet
{
    bool analytic = true;
    bool montecarlo = false;
};

struct CurveSpec
{
    std::string label;
    std::string model_name;
    PathLossModel model = preset_3gpp_case1();
    double height_diff_km = 0.0;
    double tx_power_mw = dbm_to_mw(24.0);
    double noise_mw = dbm_to_mw(-95.0);
    FadingKind fading = FadingKind::rayleigh();
    Metric metric = Metric::coverage;
    double gamma_db = 0.0;
    EngineSet engines;

    double gamma_linear() const { return db_to_linear(gamma_db); }

    NetworkParams params(double density) const
    {
        return {density, tx_power_mw, noise_mw, height_diff_km, fading};
    }
};

struct McSpec
{
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    double epsilon = 0.005;
    double max_density = 1e4; // denser points are analytic-only
    std::optional<double> sim_radius_km;
};

struct SweepSpec
{
    std::string scenario = "custom";
    std::vector<CurveSpec> curves;
    std::vector<double> densities;
    McSpec mc;
    QuadratureSpec quadrature;
    AseGrid ase_grid;
    std::optional<std::string> output_path;
    Format format = Format::csv;
};

struct ResultRow
{
    std::string scenario;
    Method engine = Method::analytic;
    double density = 0.0;
    double gamma_db = 0.0;
    std::optional<double> p_cov;
    std::optional<double> ase;
    double ci_half_width = 0.0;
    std::string error;

    bool failed() const { return !error.empty(); }
};

using ResultTable = std::vector<ResultRow>;

inline const std::vector<std::string> &csv_columns()
{
    static const std::vector<std::string> cols = {"scenario", "engine",         "lambda_per_km2", "gamma_db",
                                                  "p_cov",    "ase_bps_hz_km2", "ci_half_width",  "error"};
    return cols;
}

inline std::vector<double> log_grid(double lo, double hi, double points_per_decade)
{
    if (!(lo > 0.0 && hi >= lo && points_per_decade > 0.0))
        throw std::invalid_argument("log_grid: need 0 < lo <= hi and points_per_decade > 0");
    const double decades = std::log10(hi / lo);
    const int steps = static_cast<int>(std::lround(decades * points_per_decade));
    std::vector<double> out;
    for (int i = 0; i <= steps; ++i)
        out.push_back(steps == 0 ? lo : lo * std::pow(10.0, decades * i / steps));
    return out;
}

namespace detail
{

using json = nlohmann::json;

// Reads a number that may carry a unit: 8.5, "8.5 m", "0.0085 km".
// Returns the value converted by the matching entry of `units`; bare numbers use the first.
struct UnitRule
{
    std::string unit;
    double (*convert)(double);
};

inline double parse_quantity(const json &value, const std::string &key, const std::vector<UnitRule> &units)
{
    if (value.is_number())
        return units.front().convert(value.get<double>());
    if (!value.is_string())
        throw ConfigError(key, "expected a number or a \"<number> <unit>\" string");
    const std::string text = value.get<std::string>();
    std::istringstream in(text);
    double number = 0.0;
    std::string unit;
    if (!(in >> number))
        throw ConfigError(key, "cannot read a number from \"" + text + "\"");
    in >> unit;
    std::string trailing;
    if (in >> trailing)
        throw ConfigError(key, "unexpected trailing text in \"" + text + "\"");
    if (unit.empty())
        return units.front().convert(number);
    for (const auto &rule : units)
        if (rule.unit == unit)
            return rule.convert(number);
    std::string allowed;
    for (const auto &rule : units)
        allowed += (allowed.empty() ? "" : ", ") + rule.unit;
    throw ConfigError(key, "invalid unit '" + unit + "' (allowed: " + allowed + ")");
}

inline double identity(double x) { return x; }
inline double from_m(double x) { return m_to_km(x); }
inline double from_dbm(double x) { return dbm_to_mw(x); }
inline double from_linear_to_db(double x)
{
    if (!(x > 0.0))
        throw std::domain_error("linear ratio must be positive");
    return linear_to_db(x);
}

inline double parse_length_km(const json &v, const std::string &key)
{
    return parse_quantity(v, key, {{"m", from_m}, {"km", identity}});
}

inline double parse_power_mw(const json &v, const std::string &key)
{
    return parse_quantity(v, key, {{"dBm", from_dbm}, {"mW", identity}});
}

inline double parse_ratio_db(const json &v, const std::string &key)
{
    try
    {
        return parse_quantity(v, key, {{"dB", identity}, {"linear", from_linear_to_db}});
    }
    catch (const std::domain_error &e)
    {
        throw ConfigError(key, e.what());
    }
}

inline void reject_unknown(const json &obj, const std::string &where, const std::set<std::string> &known)
{
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
}

inline double require_positive(double v, const std::string &key)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw ConfigError(key, "must be a positive finite number");
    return v;
}

inline LosProbabilityPiece parse_los_form(const json &v, double upper_km, const std::string &key)
{
    if (v.is_string())
    {
        const auto s = v.get<std::string>();
        if (s == "zero")
            return LosProbabilityPiece::zero(upper_km);
        if (s == "one")
            return LosProbabilityPiece::constant(upper_km, 1.0);
        throw ConfigError(key, "unknown LoS probability form '" + s + "'");
    }
    if (!v.is_object() || v.size() != 1)
        throw ConfigError(key, "expected \"zero\", \"one\", {\"constant\": p} or {\"linear\": {...}}");
    if (v.contains("constant"))
        return LosProbabilityPiece::constant(upper_km, v["constant"].get<double>());
    if (v.contains("linear"))
    {
        const auto &lin = v["linear"];
        reject_unknown(lin, key + ".linear", {"intercept", "slope_per_m"});
        if (!lin.contains("intercept") || !lin.contains("slope_per_m"))
            throw ConfigError(key + ".linear", "needs intercept and slope_per_m");
        return LosProbabilityPiece::linear(upper_km, lin["intercept"].get<double>(),
                                           lin["slope_per_m"].get<double>() * 1000.0);
    }
    throw ConfigError(key, "unknown LoS probability form");
}

inline std::pair<std::string, PathLossModel> parse_model(const json &v, const std::string &key)
{
    std::string preset;
    json opts = json::object();
    if (v.is_string())
        preset = v.get<std::string>();
    else if (v.is_object() && v.contains("preset"))
    {
        preset = v["preset"].get<std::string>();
        opts = v;
    }
    else if (v.is_object() && v.contains("pieces"))
    {
        reject_unknown(v, key, {"pieces", "name"});
        std::vector<PathLossPiece> pieces;
        std::vector<LosProbabilityPiece> los;
        const auto &arr = v["pieces"];
        if (!arr.is_array() || arr.empty())
            throw ConfigError(key + ".pieces", "must be a non-empty array");
        for (std::size_t i = 0; i < arr.size(); ++i)
        {
            const auto &p = arr[i];
            const std::string pk = key + ".pieces[" + std::to_string(i) + "]";
            reject_unknown(p, pk, {"d_n_m", "a_los", "alpha_los", "a_nlos", "alpha_nlos", "los_prob_form"});
            for (const char *req : {"a_los", "alpha_los", "a_nlos", "alpha_nlos", "los_prob_form"})
                if (!p.contains(req))
                    throw ConfigError(pk + "." + req, "missing required key");
            double upper = infinity;
            if (p.contains("d_n_m") && !p["d_n_m"].is_null() &&
                !(p["d_n_m"].is_string() && p["d_n_m"].get<std::string>() == "inf"))
                upper = m_to_km(p["d_n_m"].get<double>());
            pieces.push_back({upper, p["a_los"].get<double>(), p["alpha_los"].get<double>(),
                              p["a_nlos"].get<double>(), p["alpha_nlos"].get<double>()});
            los.push_back(parse_los_form(p["los_prob_form"], upper, pk + ".los_prob_form"));
        }
        try
        {
            return {v.value("name", std::string("custom")), PathLossModel(std::move(pieces), std::move(los))};
        }
        catch (const std::invalid_argument &e)
        {
            throw ConfigError(key, e.what());
        }
    }
    else
        throw ConfigError(key, "expected a preset name, {\"preset\": ...} or {\"pieces\": [...]}");

    if (preset == "3gpp-case1")
    {
        reject_unknown(opts, key, {"preset", "alpha_los"});
        const double alpha_los = opts.value("alpha_los", case1::los_exponent);
        require_positive(alpha_los, key + ".alpha_los");
        std::string name = preset;
        if (alpha_los != case1::los_exponent)
        {
            std::ostringstream os;
            os << preset << "-alpha_los" << alpha_los;
            name = os.str();
        }
        return {name, preset_3gpp_case1(alpha_los)};
    }
    if (preset == "single-slope")
    {
        reject_unknown(opts, key, {"preset", "amplitude", "exponent"});
        const double amp = opts.value("amplitude", case1::nlos_amplitude);
        const double expo = opts.value("exponent", case1::nlos_exponent);
        require_positive(amp, key + ".amplitude");
        require_positive(expo, key + ".exponent");
        std::string name = preset;
        if (expo != case1::nlos_exponent)
        {
            std::ostringstream os;
            os << preset << "-alpha" << expo;
            name = os.str();
        }
        return {name, preset_single_slope(amp, expo)};
    }
    throw ConfigError(key, "unknown model preset '" + preset + "' (known: 3gpp-case1, single-slope)");
}

inline FadingKind parse_fading(const json &v, const std::string &key)
{
    if (v.is_string())
    {
        const auto s = v.get<std::string>();
        if (s == "rayleigh")
            return FadingKind::rayleigh();
        if (s == "rician")
            return FadingKind::rician();
        throw ConfigError(key, "unknown fading '" + s + "' (known: rayleigh, rician)");
    }
    if (v.is_object())
    {
        reject_unknown(v, key, {"kind", "k_intercept_db", "k_slope_db_per_m"});
        if (v.value("kind", std::string()) != "rician")
            throw ConfigError(key + ".kind", "only rician takes parameters");
        return FadingKind::rician(v.value("k_intercept_db", 13.0), v.value("k_slope_db_per_m", -0.03));
    }
    throw ConfigError(key, "expected \"rayleigh\", \"rician\" or an object");
}

inline EngineSet parse_engines(const json &v, const std::string &key)
{
    auto one = [&](const std::string &s, EngineSet &set) {
        if (s == "analytic")
            set.analytic = true;
        else if (s == "montecarlo")
            set.montecarlo = true;
        else if (s == "both")
            set.analytic = set.montecarlo = true;
        else
            throw ConfigError(key, "unknown engine '" + s + "' (known: analytic, montecarlo, both)");
    };
    EngineSet set{false, false};
    if (v.is_string())
        one(v.get<std::string>(), set);
    else if (v.is_array())
        for (const auto &e : v)
            one(e.get<std::string>(), set);
    else
        throw ConfigError(key, "expected a string or an array of strings");
    if (!set.analytic && !set.montecarlo)
        throw ConfigError(key, "at least one engine is required");
    return set;
}

inline const std::set<std::string> &curve_keys()
{
    static const std::set<std::string> keys = {"model", "L", "P", "N0", "fading", "metric", "gamma", "engines"};
    return keys;
}

// Applies the curve-level keys present in `obj` onto `curve`.
inline void apply_curve_keys(const json &obj, const std::string &where, CurveSpec &curve, bool &has_model,
                             bool &has_height)
{
    auto key = [&](const char *k) { return where.empty() ? std::string(k) : where + "." + k; };
    if (obj.contains("model"))
    {
        auto [name, model] = parse_model(obj["model"], key("model"));
        curve.model_name = name;
        curve.model = std::move(model);
        has_model = true;
    }
    if (obj.contains("L"))
    {
        const double L = parse_length_km(obj["L"], key("L"));
        if (!(L >= 0.0) || !std::isfinite(L))
            throw ConfigError(key("L"), "antenna height difference must be >= 0");
        curve.height_diff_km = L;
        has_height = true;
    }
    if (obj.contains("P"))
        curve.tx_power_mw = require_positive(parse_power_mw(obj["P"], key("P")), key("P"));
    if (obj.contains("N0"))
    {
        const double n0 = parse_power_mw(obj["N0"], key("N0"));
        if (!(n0 >= 0.0) || !std::isfinite(n0))
            throw ConfigError(key("N0"), "noise power must be >= 0");
        curve.noise_mw = n0;
    }
    if (obj.contains("fading"))
        curve.fading = parse_fading(obj["fading"], key("fading"));
    if (obj.contains("metric"))
    {
        const auto m = obj["metric"].get<std::string>();
        if (m == "coverage")
            curve.metric = Metric::coverage;
        else if (m == "ase")
            curve.metric = Metric::ase;
        else
            throw ConfigError(key("metric"), "unknown metric '" + m + "' (known: coverage, ase)");
    }
    if (obj.contains("gamma"))
        curve.gamma_db = parse_ratio_db(obj["gamma"], key("gamma"));
    if (obj.contains("engines"))
        curve.engines = parse_engines(obj["engines"], key("engines"));
}

inline std::string default_label(const CurveSpec &c)
{
    std::ostringstream os;
    os << c.model_name << "/L=" << km_to_m(c.height_diff_km) << "m";
    if (!c.fading.is_rayleigh())
        os << "/rician";
    return os.str();
}

} // namespace detail

// Parses and validates a JSON scenario config. Lengths default to meters, powers to
// dBm and thresholds to dB; any value may instead be written as "<number> <unit>".
inline SweepSpec parse_config(const std::string &text)
{
    using detail::json;
    json root;
    try
    {
        root = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
    }
    if (!root.is_object())
        throw ConfigError("<root>", "config must be a JSON object");

    std::set<std::string> known = detail::curve_keys();
    known.insert({"scenario", "lambda", "mc", "quadrature", "ase_grid", "output", "curves"});
    detail::reject_unknown(root, "", known);

    SweepSpec spec;
    try
    {
        spec.scenario = root.value("scenario", std::string("custom"));

        CurveSpec base;
        bool base_model = false, base_height = false;
        detail::apply_curve_keys(root, "", base, base_model, base_height);

        if (root.contains("curves"))
        {
            const auto &arr = root["curves"];
            if (!arr.is_array() || arr.empty())
                throw ConfigError("curves", "must be a non-empty array");
            for (std::size_t i = 0; i < arr.size(); ++i)
            {
                const std::string where = "curves[" + std::to_string(i) + "]";
                auto keys = detail::curve_keys();
                keys.insert("label");
                detail::reject_unknown(arr[i], where, keys);
                CurveSpec c = base;
                bool has_model = base_model, has_height = base_height;
                detail::apply_curve_keys(arr[i], where, c, has_model, has_height);
                if (!has_model)
                    throw ConfigError(where + ".model", "missing required key");
                if (!has_height)
                    throw ConfigError(where + ".L", "missing required key");
                c.label = arr[i].value("label", detail::default_label(c));
                spec.curves.push_back(std::move(c));
            }
        }
        else
        {
            if (!base_model)
                throw ConfigError("model", "missing required key");
            if (!base_height)
                throw ConfigError("L", "missing required key");
            base.label = detail::default_label(base);
            spec.curves.push_back(std::move(base));
        }

        for (const auto &c : spec.curves)
            if (c.engines.analytic && !c.fading.is_rayleigh())
                throw ConfigError("engines", "curve '" + c.label + "': the analytic engine requires Rayleigh fading");

        if (root.contains("lambda"))
        {
            const auto &g = root["lambda"];
            if (g.is_array())
            {
                for (const auto &x : g)
                    spec.densities.push_back(x.get<double>());
            }
            else if (g.is_object())
            {
                detail::reject_unknown(g, "lambda", {"min", "max", "points_per_decade"});
                const double lo = g.value("min", 0.1);
                const double hi = g.value("max", 1e5);
                const double ppd = g.value("points_per_decade", 8.0);
                if (!(lo > 0.0 && hi >= lo && ppd > 0.0))
                    throw ConfigError("lambda", "need 0 < min <= max and points_per_decade > 0");
                spec.densities = log_grid(lo, hi, ppd);
            }
            else
                throw ConfigError("lambda", "expected an array or {min, max, points_per_decade}");
        }
        else
        {
            spec.densities = log_grid(0.1, 1e5, 8.0);
        }
        if (spec.densities.empty())
            throw ConfigError("lambda", "grid is empty");
        for (std::size_t i = 0; i < spec.densities.size(); ++i)
        {
            if (!(spec.densities[i] > 0.0) || !std::isfinite(spec.densities[i]))
                throw ConfigError("lambda", "densities must be positive");
            if (i > 0 && !(spec.densities[i] > spec.densities[i - 1]))
                throw ConfigError("lambda", "densities must be strictly increasing");
        }

        if (root.contains("mc"))
        {
            const auto &mc = root["mc"];
            detail::reject_unknown(mc, "mc", {"trials", "seed", "epsilon", "max_density", "sim_radius"});
            spec.mc.trials = mc.value("trials", spec.mc.trials);
            spec.mc.seed = mc.value("seed", spec.mc.seed);
            spec.mc.epsilon = mc.value("epsilon", spec.mc.epsilon);
            spec.mc.max_density = mc.value("max_density", spec.mc.max_density);
            if (mc.contains("sim_radius"))
                spec.mc.sim_radius_km =
                    detail::require_positive(detail::parse_length_km(mc["sim_radius"], "mc.sim_radius"), "mc.sim_radius");
            if (spec.mc.trials < 100)
                throw ConfigError("mc.trials", "must be >= 100");
            if (!(spec.mc.epsilon > 0.0 && spec.mc.epsilon < 1.0))
                throw ConfigError("mc.epsilon", "must lie in (0, 1)");
        }

        if (root.contains("quadrature"))
        {
            const auto &q = root["quadrature"];
            detail::reject_unknown(q, "quadrature", {"rel_tol", "abs_tol", "max_depth", "max_subdivisions", "tail_cut"});
            spec.quadrature.rel_tol = q.value("rel_tol", spec.quadrature.rel_tol);
            spec.quadrature.abs_tol = q.value("abs_tol", spec.quadrature.abs_tol);
            spec.quadrature.max_depth = q.value("max_depth", spec.quadrature.max_depth);
            spec.quadrature.max_subdivisions = q.value("max_subdivisions", spec.quadrature.max_subdivisions);
            spec.quadrature.tail_cut = q.value("tail_cut", spec.quadrature.tail_cut);
            try
            {
                spec.quadrature.validate();
            }
            catch (const std::invalid_argument &e)
            {
                throw ConfigError("quadrature", e.what());
            }
        }

        if (root.contains("ase_grid"))
        {
            const auto &a = root["ase_grid"];
            detail::reject_unknown(a, "ase_grid", {"points_per_decade", "gamma_max"});
            spec.ase_grid.points_per_decade = a.value("points_per_decade", spec.ase_grid.points_per_decade);
            if (a.contains("gamma_max"))
                spec.ase_grid.gamma_max = db_to_linear(detail::parse_ratio_db(a["gamma_max"], "ase_grid.gamma_max"));
            if (spec.ase_grid.points_per_decade < 2)
                throw ConfigError("ase_grid.points_per_decade", "must be >= 2");
        }

        if (root.contains("output"))
        {
            const auto &o = root["output"];
            detail::reject_unknown(o, "output", {"path", "format"});
            if (o.contains("path"))
                spec.output_path = o["path"].get<std::string>();
            const auto fmt = o.value("format", std::string("csv"));
            if (fmt == "csv")
                spec.format = Format::csv;
            else if (fmt == "json")
                spec.format = Format::json;
            else
                throw ConfigError("output.format", "unknown format '" + fmt + "' (known: csv, json)");
        }
    }
    catch (const detail::json::exception &e)
    {
        throw ConfigError("<value>", std::string("wrong JSON type: ") + e.what());
    }
    return spec;
}

namespace detail
{

struct SweepTask
{
    std::size_t curve;
    std::size_t density;
    Method engine;
};

inline ResultRow evaluate_task(const SweepSpec &spec, const SweepTask &task)
{
    const auto &curve = spec.curves[task.curve];
    const double density = spec.densities[task.density];
    ResultRow row;
    row.scenario = spec.scenario + "/" + curve.label;
    row.engine = task.engine;
    row.density = density;
    row.gamma_db = curve.gamma_db;
    try
    {
        const NetworkParams params = curve.params(density);
        const double gamma = curve.gamma_linear();
        if (task.engine == Method::analytic)
        {
            if (curve.metric == Metric::coverage)
                row.p_cov = coverage_probability(curve.model, params, gamma, spec.quadrature);
            else
                row.ase = ase(curve.model, params, gamma, spec.quadrature, spec.ase_grid);
        }
        else
        {
            TrialConfig cfg{params, curve.model, 0.0, spec.mc.trials, spec.mc.seed, 1};
            cfg.sim_radius_km = spec.mc.sim_radius_km
                                    ? *spec.mc.sim_radius_km
                                    : default_sim_radius(curve.model, params, spec.mc.epsilon);
            const auto outcomes = run_trials(cfg);
            const auto est = curve.metric == Metric::coverage ? coverage_estimate(outcomes, gamma)
                                                              : ase_estimate(outcomes, density, gamma);
            (curve.metric == Metric::coverage ? row.p_cov : row.ase) = est.value;
            row.ci_half_width = est.ci_half_width;
        }
    }
    catch (const std::exception &e)
    {
        row.p_cov.reset();
        row.ase.reset();
        row.error = e.what();
    }
    return row;
}

} // namespace detail

// Evaluates every (curve, lambda, engine) point. Rows are ordered by curve, then
// lambda, then engine (analytic first), independent of the thread count.
inline ResultTable run_sweep(const SweepSpec &spec, unsigned threads = 0)
{
    std::vector<detail::SweepTask> tasks;
    for (std::size_t c = 0; c < spec.curves.size(); ++c)
        for (std::size_t d = 0; d < spec.densities.size(); ++d)
        {
            if (spec.curves[c].engines.analytic)
                tasks.push_back({c, d, Method::analytic});
            if (spec.curves[c].engines.montecarlo && spec.densities[d] <= spec.mc.max_density)
                tasks.push_back({c, d, Method::montecarlo});
        }

    ResultTable table(tasks.size());
    unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(tasks.size(), 1)));
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++)
            table[i] = detail::evaluate_task(spec, tasks[i]);
    };
    if (workers <= 1)
        work();
    else
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back(work);
    }
    return table;
}

struct AgreementRow
{
    std::string scenario;
    double density;
    double analytic;
    double montecarlo;
    double ci_half_width;
    bool within_3_sigma; // |analytic - mc| <= 3 * ci_half_width
};

// Pairs analytic and Monte Carlo rows of the same curve and density.
inline std::vector<AgreementRow> cross_validate(const ResultTable &table)
{
    std::vector<AgreementRow> out;
    for (std::size_t i = 0; i + 1 < table.size(); ++i)
    {
        const auto &a = table[i];
        const auto &m = table[i + 1];
        if (a.engine != Method::analytic || m.engine != Method::montecarlo || a.scenario != m.scenario ||
            a.density != m.density || a.failed() || m.failed())
            continue;
        const double av = a.p_cov ? *a.p_cov : a.ase.value_or(0.0);
        const double mv = m.p_cov ? *m.p_cov : m.ase.value_or(0.0);
        out.push_back({a.scenario, a.density, av, mv, m.ci_half_width,
                       std::abs(av - mv) <= 3.0 * m.ci_half_width});
    }
    return out;
}

namespace detail
{

inline std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string csv_escape(const std::string &s)
{
    if (s.find_first_of(",\"\n\r") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s)
    {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

inline std::string to_csv(const ResultTable &table)
{
    std::string out;
    const auto &cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        out += (i ? "," : "") + cols[i];
    out += "\n";
    for (const auto &r : table)
    {
        out += detail::csv_escape(r.scenario) + "," + to_string(r.engine) + "," + detail::format_number(r.density) +
               "," + detail::format_number(r.gamma_db) + "," + (r.p_cov ? detail::format_number(*r.p_cov) : "") +
               "," + (r.ase ? detail::format_number(*r.ase) : "") + "," + detail::format_number(r.ci_half_width) +
               "," + detail::csv_escape(r.error) + "\n";
    }
    return out;
}

inline std::string to_json(const ResultTable &table)
{
    // Numbers are written through the same 9-significant-digit formatter as CSV.
    auto num = [](double v) { return detail::format_number(v); };
    auto str = [](const std::string &s) { return nlohmann::json(s).dump(); };
    std::string out = "[\n";
    for (std::size_t i = 0; i < table.size(); ++i)
    {
        const auto &r = table[i];
        out += "  {\"scenario\": " + str(r.scenario) + ", \"engine\": " + str(to_string(r.engine)) +
               ", \"lambda_per_km2\": " + num(r.density) + ", \"gamma_db\": " + num(r.gamma_db) +
               ", \"p_cov\": " + (r.p_cov ? num(*r.p_cov) : "null") +
               ", \"ase_bps_hz_km2\": " + (r.ase ? num(*r.ase) : "null") +
               ", \"ci_half_width\": " + num(r.ci_half_width) + ", \"error\": " + str(r.error) + "}" +
               (i + 1 < table.size() ? ",\n" : "\n");
    }
    return out + "]\n";
}

inline std::string render(const ResultTable &table, Format format)
{
    if (table.empty())
        throw std::invalid_argument("emit: result table is empty");
    return format == Format::csv ? to_csv(table) : to_json(table);
}

// Writes the table to `path`.
inline void emit(const ResultTable &table, Format format, const std::string &path)
{
    const std::string text = render(table, format);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("emit: cannot open '" + path + "' for writing");
    out << text;
    if (!out.flush())
        throw std::runtime_error("emit: write to '" + path + "' failed");
}

// Reads back a table written by to_csv.
inline ResultTable parse_csv_table(const std::string &text)
{
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const char c = text[i];
        if (quoted)
        {
            if (c == '"' && i + 1 < text.size() && text[i + 1] == '"')
            {
                field += '"';
                ++i;
            }
            else if (c == '"')
                quoted = false;
            else
                field += c;
            continue;
        }
        if (c == '"')
            quoted = true;
        else if (c == ',')
        {
            fields.push_back(field);
            field.clear();
        }
        else if (c == '\n')
        {
            fields.push_back(field);
            records.push_back(fields);
            fields.clear();
            field.clear();
            any = false;
            continue;
        }
        else if (c != '\r')
            field += c;
        any = true;
    }
    if (any)
    {
        fields.push_back(field);
        records.push_back(fields);
    }
    if (records.empty() || records.front() != csv_columns())
        throw std::runtime_error("parse_csv_table: unexpected header");

    ResultTable table;
    for (std::size_t i = 1; i < records.size(); ++i)
    {
        const auto &f = records[i];
        if (f.size() != csv_columns().size())
            throw std::runtime_error("parse_csv_table: wrong field count on line " + std::to_string(i + 1));
        ResultRow r;
        r.scenario = f[0];
        r.engine = f[1] == "analytic" ? Method::analytic : Method::montecarlo;
        r.density = std::stod(f[2]);
        r.gamma_db = std::stod(f[3]);
        if (!f[4].empty())
            r.p_cov = std::stod(f[4]);
        if (!f[5].empty())
            r.ase = std::stod(f[5]);
        r.ci_half_width = std::stod(f[6]);
        r.error = f[7];
        table.push_back(std::move(r));
    }
    return table;
}

// Bundled scenarios.
inline const std::map<std::string, std::string> &bundled_scenarios()
{
    static const std::map<std::string, std::string> scenarios = {
        {"fig1-ase-overview", R"({
  "scenario": "fig1-ase-overview",
  "metric": "ase",
  "gamma": "0 dB",
  "engines": "analytic",
  "lambda": {"min": 0.1, "max": 1e5, "points_per_decade": 8},
  "curves": [
    {"label": "single-slope/L=0m", "model": "single-slope", "L": 0},
    {"label": "3gpp-case1/L=0m", "model": "3gpp-case1", "L": 0},
    {"label": "3gpp-case1/L=8.5m", "model": "3gpp-case1", "L": 8.5}
  ]
})"},
        {"fig3-coverage", R"({
  "scenario": "fig3-coverage",
  "metric": "coverage",
  "gamma": "0 dB",
  "engines": "both",
  "lambda": {"min": 0.1, "max": 1e5, "points_per_decade": 8},
  "mc": {"trials": 10000, "seed": 2016, "max_density": 1e4},
  "curves": [
    {"label": "single-slope/L=0m", "model": "single-slope", "L": 0},
    {"label": "single-slope/L=8.5m", "model": "single-slope", "L": 8.5},
    {"label": "3gpp-case1/L=0m", "model": "3gpp-case1", "L": 0},
    {"label": "3gpp-case1/L=8.5m", "model": "3gpp-case1", "L": 8.5}
  ]
})"},
        {"fig4-ase", R"({
  "scenario": "fig4-ase",
  "metric": "ase",
  "gamma": "0 dB",
  "engines": "analytic",
  "lambda": {"min": 0.1, "max": 1e5, "points_per_decade": 8},
  "curves": [
    {"label": "single-slope/L=0m", "model": "single-slope", "L": 0},
    {"label": "single-slope/L=8.5m", "model": "single-slope", "L": 8.5},
    {"label": "3gpp-case1/L=0m", "model": "3gpp-case1", "L": 0},
    {"label": "3gpp-case1/L=8.5m", "model": "3gpp-case1", "L": 8.5}
  ]
})"},
        {"fig5-variants", R"({
  "scenario": "fig5-variants",
  "metric": "ase",
  "gamma": "0 dB",
  "model": "3gpp-case1",
  "engines": "analytic",
  "lambda": {"min": 0.1, "max": 1e5, "points_per_decade": 8},
  "mc": {"trials": 10000, "seed": 2016, "max_density": 1e4},
  "curves": [
    {"label": "3gpp-case1/L=0m", "L": 0},
    {"label": "3gpp-case1/L=8.5m", "L": 8.5},
    {"label": "3gpp-case1/L=3.5m", "L": 3.5},
    {"label": "3gpp-case1-alpha_los1.09/L=8.5m", "model": {"preset": "3gpp-case1", "alpha_los": 1.09}, "L": 8.5},
    {"label": "3gpp-case1/L=8.5m/rician", "L": 8.5, "fading": "rician", "engines": "montecarlo"}
  ]
})"},
    };
    return scenarios;
}

inline SweepSpec bundled_scenario(const std::string &name)
{
    const auto &all = bundled_scenarios();
    const auto it = all.find(name);
    if (it == all.end())
        throw ConfigError("scenario", "unknown bundled scenario '" + name + "'");
    return parse_config(it->second);
}

} // namespace udn

#endif
