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

// Scenario JSON schema:
//   {"M": int,
//    "users": [{"N": int, "W_lambda": float, "P": float, "K": int,
//               "paths": [{"gain_re": float, "gain_im": float,
//                          "aoa_rad": float, "aod_rad": float}]}]}

#include <fstream>
#include <string>

#include <json.hpp>

#include "fluidcap/channel.hpp"

namespace fluidcap
{

inline nlohmann::json to_json(const Scenario &s)
{
    nlohmann::json users = nlohmann::json::array();
    for (const UserConfig &u : s.users)
    {
        nlohmann::json paths = nlohmann::json::array();
        for (const Path &p : u.paths.paths)
            paths.push_back({{"gain_re", p.gain.real()},
                             {"gain_im", p.gain.imag()},
                             {"aoa_rad", p.aoa},
                             {"aod_rad", p.aod}});
        users.push_back({{"N", u.N}, {"W_lambda", u.W}, {"P", u.P}, {"K", u.K}, {"paths", std::move(paths)}});
    }
    return {{"M", s.M}, {"users", std::move(users)}};
}

/// Parses and validates a scenario. Schema violations and broken invariants
/// both raise InvalidConfig.
inline Scenario scenario_from_json(const nlohmann::json &j)
{
    try
    {
        Scenario s;
        s.M = j.at("M").get<int>();
        for (const auto &ju : j.at("users"))
        {
            UserConfig u;
            u.N = ju.at("N").get<int>();
            u.W = ju.at("W_lambda").get<double>();
            u.P = ju.at("P").get<double>();
            u.K = ju.at("K").get<int>();
            for (const auto &jp : ju.at("paths"))
                u.paths.paths.push_back({cdouble(jp.at("gain_re").get<double>(), jp.at("gain_im").get<double>()),
                                         jp.at("aoa_rad").get<double>(), jp.at("aod_rad").get<double>()});
            s.users.push_back(std::move(u));
        }
        validate(s);
        return s;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw InvalidConfig(std::string("scenario JSON: ") + e.what());
    }
}

inline void write_scenario(const Scenario &s, const std::string &path)
{
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot open " + path + " for writing");
    out << to_json(s).dump(2) << '\n';
    if (!out)
        throw IoError("failed writing " + path);
}

inline Scenario read_scenario(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path);
    nlohmann::json j;
    try
    {
        in >> j;
    }
    catch (const nlohmann::json::exception &e)
    {
        throw InvalidConfig("scenario " + path + ": " + e.what());
    }
    return scenario_from_json(j);
}

} // namespace fluidcap
