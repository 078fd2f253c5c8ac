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


// udn_sweep: density sweeps of coverage probability and ASE.
//
//   udn_sweep run --config <file> [--out <path>] [--format csv|json] [--threads N]
//   udn_sweep scenario <name> [--out <path>] [--format csv|json] [--threads N]
//   udn_sweep scenario --list
//
// Exit status: 0 all points succeeded, 1 config error, 2 some or all points failed.
// UDN_THREADS overrides the worker count when --threads is absent.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "udn/sweep.hpp"

namespace
{

unsigned thread_count(int flag)
{
    if (flag > 0)
        return static_cast<unsigned>(flag);
    if (const char *env = std::getenv("UDN_THREADS"))
    {
        const int n = std::atoi(env);
        if (n > 0)
            return static_cast<unsigned>(n);
        std::cerr << "warning: ignoring UDN_THREADS='" << env << "'\n";
    }
    return 0;
}

int execute(udn::SweepSpec spec, const std::string &out, const std::string &format, int threads)
{
    if (!out.empty())
        spec.output_path = out;
    if (format == "csv")
        spec.format = udn::Format::csv;
    else if (format == "json")
        spec.format = udn::Format::json;

    const auto table = udn::run_sweep(spec, thread_count(threads));
    std::size_t failed = 0;
    for (const auto &row : table)
        if (row.failed())
        {
            ++failed;
            std::cerr << "point failed: " << row.scenario << " " << udn::to_string(row.engine)
                      << " lambda=" << row.density << ": " << row.error << "\n";
        }
    for (const auto &a : udn::cross_validate(table))
        if (!a.within_3_sigma)
            std::cerr << "disagreement: " << a.scenario << " lambda=" << a.density << " analytic=" << a.analytic
                      << " montecarlo=" << a.montecarlo << " ci=" << a.ci_half_width << "\n";

    try
    {
        if (spec.output_path)
            udn::emit(table, spec.format, *spec.output_path);
        else
            std::cout << udn::render(table, spec.format);
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    if (failed)
        std::cerr << failed << " of " << table.size() << " points failed\n";
    return failed ? 2 : 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Coverage probability and area spectral efficiency sweeps over base station density"};
    app.require_subcommand(1);

    std::string config_path, out, format, scenario_name;
    int threads = 0;
    bool list = false;

    auto *run = app.add_subcommand("run", "Run a sweep described by a JSON config file");
    run->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

    auto *scenario = app.add_subcommand("scenario", "Run a bundled scenario");
    scenario->add_option("name", scenario_name, "Scenario name");
    scenario->add_flag("--list", list, "List bundled scenarios");

    for (auto *sub : {run, scenario})
    {
        sub->add_option("--out", out, "Output file (default: config output.path or stdout)");
        sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--threads", threads, "Worker threads (default: UDN_THREADS or all cores)")
            ->check(CLI::PositiveNumber);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try
    {
        if (*scenario)
        {
            if (list)
            {
                for (const auto &[name, text] : udn::bundled_scenarios())
                    std::cout << name << "\n";
                return 0;
            }
            if (scenario_name.empty())
                throw udn::ConfigError("scenario", "name required (see --list)");
            return execute(udn::bundled_scenario(scenario_name), out, format, threads);
        }
        std::ifstream in(config_path);
        std::stringstream text;
        text << in.rdbuf();
        return execute(udn::parse_config(text.str()), out, format, threads);
    }
    catch (const udn::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
}
