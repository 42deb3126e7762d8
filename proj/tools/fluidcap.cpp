// SPDX-License-Identifier: Apache-2.0
//
// fluidcap: sum-capacity maximization for fluid-antenna multiple access channels
// Copyright (C) 2026 The fluidcap authors
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

// fluidcap command line: scenario generation, single solves, sweeps, bounds.
//
// Exit status: 0 on success, 2 on configuration or I/O errors, 3 when a
// solver fails to converge.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fluidcap/fluidcap.hpp"

namespace
{

using nlohmann::json;

json report_json(const fluidcap::SolveReport &r)
{
    json users = json::array();
    for (std::size_t u = 0; u < r.positions.size(); ++u)
    {
        const fluidcap::CMatrix &q = r.covariances[u].matrix().matrix();
        json re = json::array(), im = json::array();
        for (fluidcap::Index i = 0; i < q.rows(); ++i)
        {
            json rr = json::array(), ii = json::array();
            for (fluidcap::Index j = 0; j < q.cols(); ++j)
            {
                rr.push_back(q(i, j).real());
                ii.push_back(q(i, j).imag());
            }
            re.push_back(rr);
            im.push_back(ii);
        }
        users.push_back({{"positions", r.positions[u].values()},
                         {"covariance_re", re},
                         {"covariance_im", im},
                         {"power", r.covariances[u].trace()}});
    }
    return {{"algorithm", r.algorithm},
            {"capacity_bits", r.capacity_bits},
            {"initial_capacity_bits", r.initial_capacity_bits},
            {"iterations", r.iterations},
            {"runtime_ms", r.runtime_ms},
            {"objective_trace", r.objective_trace},
            {"rank_residuals", r.rank_residuals},
            {"users", users}};
}

void write_text(const std::string &path, const std::string &text)
{
    if (path.empty() || path == "-")
    {
        std::cout << text;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw fluidcap::IoError("cannot open '" + path + "' for writing");
    f << text;
}

template <class T>
std::vector<T> split_list(const std::string &s)
{
    std::vector<T> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        if (item.empty())
            continue;
        if constexpr (std::is_same_v<T, std::string>)
            out.push_back(item);
        else
        {
            std::size_t used = 0;
            double v = 0.0;
            try
            {
                v = std::stod(item, &used);
            }
            catch (const std::exception &)
            {
                used = 0;
            }
            if (used != item.size())
                throw fluidcap::InvalidConfig("not a number: '" + item + "'");
            out.push_back(v);
        }
    }
    return out;
}

void add_dims(CLI::App *cmd, fluidcap::ScenarioDims &d)
{
    cmd->add_option("--M", d.M, "base-station antennas")->capture_default_str();
    cmd->add_option("--U", d.U, "users")->capture_default_str();
    cmd->add_option("--N", d.N, "antennas per user")->capture_default_str();
    cmd->add_option("--L", d.L, "paths per user")->capture_default_str();
    cmd->add_option("--W", d.W, "aperture length in wavelengths")->capture_default_str();
    cmd->add_option("--K", d.K, "position grid quantization")->capture_default_str();
    cmd->add_option("--snr", d.snr_db, "SNR in dB (P = 10^(snr/10))")->capture_default_str();
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Sum-capacity maximization for fluid-antenna multiple access channels"};
    app.require_subcommand(1);

    // gen
    fluidcap::ScenarioDims gen_dims;
    std::uint64_t gen_seed = 1;
    std::string gen_out;
    auto *gen = app.add_subcommand("gen", "write a random scenario as JSON");
    add_dims(gen, gen_dims);
    gen->add_option("--seed", gen_seed, "random seed")->capture_default_str();
    gen->add_option("--out,-o", gen_out, "output file (default stdout)");

    // solve
    std::string solve_scenario, solve_alg = "alg4", solve_out;
    fluidcap::SolveOptions solve_opt;
    auto *solve = app.add_subcommand("solve", "solve one scenario");
    solve->add_option("--scenario", solve_scenario, "scenario JSON")->required();
    solve->add_option("--algorithm,-a", solve_alg, "alg1|alg2|alg3|alg4|fixed|es|iwf-es|siwf-es")
        ->capture_default_str();
    solve->add_option("--tau", solve_opt.tau, "rank-one penalty weight")->capture_default_str();
    solve->add_option("--K", solve_opt.K, "grid quantization override (0 keeps the scenario's)");
    solve->add_option("--step", solve_opt.step, "grid step for exhaustive benchmarks (0 means W/K)");
    solve->add_option("--out,-o", solve_out, "output file (default stdout)");

    // sweep
    fluidcap::SweepSpec spec;
    std::string sweep_param = "M", sweep_values, sweep_algs = "fixed", sweep_out, sweep_format = "csv",
                sweep_scenario;
    auto *sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one parameter");
    add_dims(sweep, spec.base);
    sweep->add_option("--param", sweep_param, "M|N|U|L|W_lambda|snr_db")->capture_default_str();
    sweep->add_option("--values", sweep_values, "comma-separated values")->required();
    sweep->add_option("--trials", spec.trials, "trials per value")->capture_default_str();
    sweep->add_option("--algorithms", sweep_algs, "comma-separated solver names")->capture_default_str();
    sweep->add_option("--seed", spec.seed, "sweep seed")->capture_default_str();
    sweep->add_option("--tau", spec.tau, "rank-one penalty weight")->capture_default_str();
    sweep->add_option("--scenario", sweep_scenario, "solve this scenario in every trial");
    sweep->add_option("--threads", spec.threads, "worker threads (default FLUIDCAP_THREADS or all cores)");
    sweep->add_flag("--timing", spec.record_timing, "record wall-clock runtimes");
    sweep->add_option("--out,-o", sweep_out, "output file (default stdout)");
    sweep->add_option("--format", sweep_format, "csv|json")->capture_default_str();

    // bound
    std::string bound_scenario, bound_kind = "ub";
    auto *bound = app.add_subcommand("bound", "evaluate a capacity bound");
    bound->add_option("--scenario", bound_scenario, "scenario JSON")->required();
    bound->add_option("--kind", bound_kind, "ub|approx|c0")->capture_default_str();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (gen->parsed())
        {
            const fluidcap::Scenario s = fluidcap::random_scenario(gen_seed, gen_dims);
            write_text(gen_out, fluidcap::to_json(s).dump(2) + "\n");
        }
        else if (solve->parsed())
        {
            const fluidcap::Scenario s = fluidcap::read_scenario(solve_scenario);
            const fluidcap::SolveReport r = fluidcap::solve(solve_alg, s, solve_opt);
            write_text(solve_out, report_json(r).dump(2) + "\n");
        }
        else if (sweep->parsed())
        {
            spec.param = fluidcap::parse_sweep_param(sweep_param);
            spec.values = split_list<double>(sweep_values);
            spec.algorithms = split_list<std::string>(sweep_algs);
            if (!sweep_scenario.empty())
                spec.scenario = fluidcap::read_scenario(sweep_scenario);
            const fluidcap::OutputFormat fmt = fluidcap::parse_output_format(sweep_format);
            const fluidcap::SweepResults res = fluidcap::run_sweep(spec);
            if (sweep_out.empty() || sweep_out == "-")
                std::cout << (fmt == fluidcap::OutputFormat::csv ? fluidcap::to_csv(res.rows)
                                                                 : fluidcap::to_json(res).dump(2) + "\n");
            else
                fluidcap::emit(res, sweep_out, fmt);
        }
        else if (bound->parsed())
        {
            const fluidcap::Scenario s = fluidcap::read_scenario(bound_scenario);
            double value = 0.0;
            if (bound_kind == "ub")
                value = fluidcap::capacity_upper_bound(s);
            else if (bound_kind == "approx")
                value = fluidcap::capacity_approx(s);
            else if (bound_kind == "c0")
            {
                if (s.users.size() != 1 || s.users.front().N != 1)
                    throw fluidcap::InvalidConfig("c0 needs a single single-antenna user");
                value = fluidcap::c0_large_m(s.users.front(), s.M);
            }
            else
                throw fluidcap::InvalidConfig("unknown bound kind '" + bound_kind + "'");
            std::cout << json{{"kind", bound_kind}, {"capacity_bits", value}}.dump() << "\n";
        }
    }
    catch (const fluidcap::NonConvergence &e)
    {
        std::cerr << "fluidcap: " << e.what() << "\n";
        return 3;
    }
    catch (const std::exception &e)
    {
        std::cerr << "fluidcap: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
