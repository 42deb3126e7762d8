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

#pragma once

// Monte Carlo sweeps: per-trial seeded scenarios, every requested solver on
// each, rows sorted deterministically and written as CSV or JSON.

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "fluidcap/solvers.hpp"

namespace fluidcap
{

enum class SweepParam
{
    M,
    N,
    U,
    L,
    W_lambda,
    snr_db
};

inline SweepParam parse_sweep_param(std::string_view name)
{
    if (name == "M")
        return SweepParam::M;
    if (name == "N")
        return SweepParam::N;
    if (name == "U")
        return SweepParam::U;
    if (name == "L")
        return SweepParam::L;
    if (name == "W_lambda" || name == "W")
        return SweepParam::W_lambda;
    if (name == "snr_db" || name == "snr")
        return SweepParam::snr_db;
    throw InvalidConfig("unknown sweep parameter '" + std::string(name) + "'");
}

inline std::string to_string(SweepParam p)
{
    switch (p)
    {
    case SweepParam::M:
        return "M";
    case SweepParam::N:
        return "N";
    case SweepParam::U:
        return "U";
    case SweepParam::L:
        return "L";
    case SweepParam::W_lambda:
        return "W_lambda";
    case SweepParam::snr_db:
        return "snr_db";
    }
    return "?";
}

struct SweepSpec
{
    SweepParam param = SweepParam::M;
    std::vector<double> values;
    int trials = 100;
    ScenarioDims base{};
    std::vector<std::string> algorithms{"fixed"};
    std::uint64_t seed = 1;
    double tau = 2.0;
    // When set, every trial solves this scenario instead of a random one.
    std::optional<Scenario> scenario;
    // Wall-clock times make output non-reproducible, so they are opt-in.
    bool record_timing = false;
    // 0 reads FLUIDCAP_THREADS, falling back to the hardware concurrency.
    unsigned threads = 0;
};

struct ResultRow
{
    std::optional<std::uint64_t> seed; // empty on aggregate rows
    int M = 0;
    int U = 0;
    int N = 0;
    int L = 0;
    double W_lambda = 0.0;
    double snr_db = 0.0;
    std::string algorithm;
    std::optional<double> capacity_bits;
    int iterations = 0;
    double runtime_ms = 0.0;
    double max_rank_residual = 0.0;
    std::string status;

    friend bool operator==(const ResultRow &, const ResultRow &) = default;
};

struct SweepResults
{
    std::vector<ResultRow> rows;
    nlohmann::json metadata = nlohmann::json::object();
};

/// Per-trial seed: a splitmix64-style mix of the spec seed, the bit pattern
/// of the swept value and the trial index.
inline std::uint64_t trial_seed(std::uint64_t seed, double value, std::uint64_t trial)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed);
    h = mix(h ^ std::bit_cast<std::uint64_t>(value + 0.0));
    return mix(h ^ trial);
}

inline unsigned worker_count(unsigned requested, std::size_t tasks)
{
    unsigned n = requested;
    if (n == 0)
    {
        if (const char *env = std::getenv("FLUIDCAP_THREADS"))
        {
            const long v = std::strtol(env, nullptr, 10);
            if (v > 0)
                n = static_cast<unsigned>(v);
        }
    }
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::clamp<std::size_t>(n, 1, std::max<std::size_t>(tasks, 1)));
}

namespace detail
{

inline int integral_value(double v, const char *what)
{
    if (v != std::round(v) || v < 1.0)
        throw InvalidConfig(std::string(what) + " values must be positive integers");
    return static_cast<int>(v);
}

inline ScenarioDims apply_value(ScenarioDims d, SweepParam p, double v)
{
    switch (p)
    {
    case SweepParam::M:
        d.M = integral_value(v, "M");
        break;
    case SweepParam::N:
        d.N = integral_value(v, "N");
        break;
    case SweepParam::U:
        d.U = integral_value(v, "U");
        break;
    case SweepParam::L:
        d.L = integral_value(v, "L");
        break;
    case SweepParam::W_lambda:
        d.W = v;
        break;
    case SweepParam::snr_db:
        d.snr_db = v;
        break;
    }
    return d;
}

inline std::string status_of(const std::exception_ptr &e)
{
    try
    {
        std::rethrow_exception(e);
    }
    catch (const NonConvergence &)
    {
        return "nonconvergence";
    }
    catch (const InvalidConfig &)
    {
        return "config_error";
    }
    catch (const BudgetExceeded &)
    {
        return "budget_error";
    }
    catch (const InfeasibleMapping &)
    {
        return "infeasible_mapping";
    }
    catch (const WrongSolver &)
    {
        return "wrong_solver";
    }
    catch (const DomainError &)
    {
        return "domain_error";
    }
    catch (const ContractViolation &)
    {
        return "contract_violation";
    }
    catch (...)
    {
        return "error";
    }
}

// Dimension columns of a concrete scenario (first user's N, L, W).
inline ResultRow row_template(const Scenario &s)
{
    ResultRow r;
    r.M = static_cast<int>(s.M);
    r.U = static_cast<int>(s.users.size());
    const UserConfig &u = s.users.front();
    r.N = u.N;
    r.L = static_cast<int>(u.L());
    r.W_lambda = u.W;
    r.snr_db = 10.0 * std::log10(u.P);
    return r;
}

inline ResultRow row_template(const ScenarioDims &d)
{
    ResultRow r;
    r.M = d.M;
    r.U = d.U;
    r.N = d.N;
    r.L = d.L;
    r.W_lambda = d.W;
    r.snr_db = d.snr_db;
    return r;
}

struct TaggedRow
{
    std::size_t value_index;
    int trial;
    std::size_t algorithm_index;
    ResultRow row;
};

} // namespace detail

/// Runs every (value, trial) task on a worker pool. Rows come back sorted by
/// (value, trial, algorithm) with one "mean" row per (value, algorithm)
/// after each value's trials, averaging the successful runs.
inline SweepResults run_sweep(const SweepSpec &spec)
{
    if (spec.values.empty())
        throw InvalidConfig("sweep needs at least one value");
    if (spec.trials < 1)
        throw InvalidConfig("sweep needs at least one trial");
    if (spec.algorithms.empty())
        throw InvalidConfig("sweep needs at least one algorithm");
    for (const std::string &a : spec.algorithms)
        if (std::find(solver_names().begin(), solver_names().end(), a) == solver_names().end())
            throw InvalidConfig("unknown algorithm '" + a + "'");
    if (spec.scenario)
        validate(*spec.scenario);
    else
        for (double v : spec.values)
            (void)detail::apply_value(spec.base, spec.param, v);

    const std::size_t tasks = spec.values.size() * static_cast<std::size_t>(spec.trials);
    std::vector<std::vector<detail::TaggedRow>> slots(tasks);
    std::atomic<std::size_t> next{0};

    auto work = [&]() {
        for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1))
        {
            const std::size_t vi = t / static_cast<std::size_t>(spec.trials);
            const int trial = static_cast<int>(t % static_cast<std::size_t>(spec.trials));
            const double value = spec.values[vi];
            const std::uint64_t seed = trial_seed(spec.seed, value, static_cast<std::uint64_t>(trial));

            ResultRow base;
            std::optional<Scenario> scenario;
            std::exception_ptr gen_error;
            if (spec.scenario)
            {
                scenario = spec.scenario;
                base = detail::row_template(*scenario);
            }
            else
            {
                const ScenarioDims dims = detail::apply_value(spec.base, spec.param, value);
                base = detail::row_template(dims);
                try
                {
                    scenario = random_scenario(seed, dims);
                }
                catch (...)
                {
                    gen_error = std::current_exception();
                }
            }
            base.seed = seed;

            for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai)
            {
                ResultRow row = base;
                row.algorithm = spec.algorithms[ai];
                if (gen_error)
                {
                    row.status = detail::status_of(gen_error);
                }
                else
                {
                    try
                    {
                        SolveOptions opt;
                        opt.tau = spec.tau;
                        const SolveReport rep = solve(row.algorithm, *scenario, opt);
                        row.capacity_bits = rep.capacity_bits;
                        row.iterations = rep.iterations;
                        row.runtime_ms = spec.record_timing ? rep.runtime_ms : 0.0;
                        row.max_rank_residual = rep.max_rank_residual();
                        row.status = "ok";
                    }
                    catch (...)
                    {
                        row.status = detail::status_of(std::current_exception());
                    }
                }
                slots[t].push_back({vi, trial, ai, std::move(row)});
            }
        }
    };

    const unsigned n = worker_count(spec.threads, tasks);
    {
        std::vector<std::jthread> pool;
        for (unsigned i = 1; i < n; ++i)
            pool.emplace_back(work);
        work();
    }

    std::vector<detail::TaggedRow> all;
    for (auto &s : slots)
        for (auto &r : s)
            all.push_back(std::move(r));
    std::sort(all.begin(), all.end(), [](const detail::TaggedRow &a, const detail::TaggedRow &b) {
        return std::tie(a.value_index, a.trial, a.algorithm_index) < std::tie(b.value_index, b.trial, b.algorithm_index);
    });

    SweepResults out;
    std::size_t i = 0;
    for (std::size_t vi = 0; vi < spec.values.size(); ++vi)
    {
        std::vector<double> sum(spec.algorithms.size(), 0.0);
        std::vector<int> count(spec.algorithms.size(), 0);
        ResultRow dims_row;
        while (i < all.size() && all[i].value_index == vi)
        {
            const ResultRow &r = all[i].row;
            if (r.capacity_bits)
            {
                sum[all[i].algorithm_index] += *r.capacity_bits;
                ++count[all[i].algorithm_index];
            }
            dims_row = r;
            out.rows.push_back(r);
            ++i;
        }
        for (std::size_t ai = 0; ai < spec.algorithms.size(); ++ai)
        {
            ResultRow m = dims_row;
            m.seed.reset();
            m.algorithm = spec.algorithms[ai];
            m.capacity_bits = count[ai] > 0 ? std::optional<double>(sum[ai] / count[ai]) : std::nullopt;
            m.iterations = count[ai];
            m.runtime_ms = 0.0;
            m.max_rank_residual = 0.0;
            m.status = "mean";
            out.rows.push_back(std::move(m));
        }
    }

    out.metadata = {
        {"swept_parameter", to_string(spec.param)},
        {"values", spec.values},
        {"trials", spec.trials},
        {"seed", spec.seed},
        {"algorithms", spec.algorithms},
        {"tau", spec.tau},
        {"defaults",
         {{"M", spec.base.M},
          {"U", spec.base.U},
          {"N", spec.base.N},
          {"L", spec.base.L},
          {"W_lambda", spec.base.W},
          {"K", spec.base.K},
          {"snr_db", spec.base.snr_db}}},
        {"gain_law", "gamma ~ CN(0, 1/L) i.i.d. per path; AoA and AoD ~ U[0, pi]"},
        {"noise", "CN(0, I)"},
        {"capacity_unit", "bits/s/Hz"},
        {"source", spec.scenario ? "scenario file" : "random"},
        {"timing_recorded", spec.record_timing},
    };
    return out;
}

// ---- Output --------------------------------------------------------------------

inline constexpr const char *kCsvHeader =
    "seed,M,U,N,L,W_lambda,snr_db,algorithm,capacity_bits,iterations,runtime_ms,max_rank_residual,status";

namespace detail
{

// Shortest representation that reads back to the same double.
inline std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline std::string to_csv(const std::vector<ResultRow> &rows)
{
    std::string out = kCsvHeader;
    out += '\n';
    for (const ResultRow &r : rows)
    {
        out += r.seed ? std::to_string(*r.seed) : "";
        out += ',' + std::to_string(r.M) + ',' + std::to_string(r.U) + ',' + std::to_string(r.N) + ',' +
               std::to_string(r.L) + ',';
        out += detail::format_double(r.W_lambda) + ',' + detail::format_double(r.snr_db) + ',';
        out += r.algorithm + ',';
        out += r.capacity_bits ? detail::format_double(*r.capacity_bits) : "";
        out += ',' + std::to_string(r.iterations) + ',' + detail::format_double(r.runtime_ms) + ',' +
               detail::format_double(r.max_rank_residual) + ',' + r.status + '\n';
    }
    return out;
}

inline nlohmann::json to_json(const ResultRow &r)
{
    nlohmann::json j = {{"M", r.M},
                        {"U", r.U},
                        {"N", r.N},
                        {"L", r.L},
                        {"W_lambda", r.W_lambda},
                        {"snr_db", r.snr_db},
                        {"algorithm", r.algorithm},
                        {"iterations", r.iterations},
                        {"runtime_ms", r.runtime_ms},
                        {"max_rank_residual", r.max_rank_residual},
                        {"status", r.status}};
    j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
    j["capacity_bits"] = r.capacity_bits ? nlohmann::json(*r.capacity_bits) : nlohmann::json(nullptr);
    return j;
}

inline nlohmann::json to_json(const SweepResults &res)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const ResultRow &r : res.rows)
        rows.push_back(to_json(r));
    return {{"metadata", res.metadata}, {"rows", rows}};
}

inline SweepResults results_from_json(const nlohmann::json &j)
{
    SweepResults out;
    try
    {
        out.metadata = j.value("metadata", nlohmann::json::object());
        for (const nlohmann::json &e : j.at("rows"))
        {
            ResultRow r;
            if (!e.at("seed").is_null())
                r.seed = e.at("seed").get<std::uint64_t>();
            r.M = e.at("M").get<int>();
            r.U = e.at("U").get<int>();
            r.N = e.at("N").get<int>();
            r.L = e.at("L").get<int>();
            r.W_lambda = e.at("W_lambda").get<double>();
            r.snr_db = e.at("snr_db").get<double>();
            r.algorithm = e.at("algorithm").get<std::string>();
            if (!e.at("capacity_bits").is_null())
                r.capacity_bits = e.at("capacity_bits").get<double>();
            r.iterations = e.at("iterations").get<int>();
            r.runtime_ms = e.at("runtime_ms").get<double>();
            r.max_rank_residual = e.at("max_rank_residual").get<double>();
            r.status = e.at("status").get<std::string>();
            out.rows.push_back(std::move(r));
        }
    }
    catch (const nlohmann::json::exception &e)
    {
        throw InvalidConfig(std::string("malformed results JSON: ") + e.what());
    }
    return out;
}

enum class OutputFormat
{
    csv,
    json
};

inline OutputFormat parse_output_format(std::string_view s)
{
    if (s == "csv")
        return OutputFormat::csv;
    if (s == "json")
        return OutputFormat::json;
    throw InvalidConfig("unknown output format '" + std::string(s) + "'");
}

inline void emit(const SweepResults &res, const std::string &path, OutputFormat format)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw IoError("cannot open '" + path + "' for writing");
    if (format == OutputFormat::csv)
        f << to_csv(res.rows);
    else
        f << to_json(res).dump(2) << '\n';
    if (!f)
        throw IoError("failed writing '" + path + "'");
}

inline SweepResults read_results_json(const std::string &path)
{
    std::ifstream f(path);
    if (!f)
        throw IoError("cannot open '" + path + "'");
    nlohmann::json j;
    try
    {
        f >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw InvalidConfig(std::string("malformed results JSON: ") + e.what());
    }
    return results_from_json(j);
}

} // namespace fluidcap
