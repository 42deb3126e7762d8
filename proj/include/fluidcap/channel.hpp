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

// Geometric mmWave channel: steering vectors, per-user channel matrices and
// random scenario generation. All lengths are in wavelengths (lambda = 1) and
// the base-station ULA spacing is fixed at half a wavelength.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fluidcap/common.hpp"

namespace fluidcap
{

inline constexpr double kWavelength = 1.0;
inline constexpr double kBsSpacing = 0.5;

struct Path
{
    cdouble gain;
    double aoa; // beta, at the base station
    double aod; // theta, at the user
};

struct PathSet
{
    std::vector<Path> paths;

    Index size() const noexcept { return static_cast<Index>(paths.size()); }

    std::vector<double> aods() const
    {
        std::vector<double> out;
        out.reserve(paths.size());
        for (const Path &p : paths)
            out.push_back(p.aod);
        return out;
    }

    CVector gains() const
    {
        CVector g(size());
        for (Index l = 0; l < size(); ++l)
            g(l) = paths[static_cast<std::size_t>(l)].gain;
        return g;
    }
};

struct UserConfig
{
    int N = 1;     // FAS antenna count
    double W = 10; // FAS length, wavelengths
    double P = 10; // power budget, noise-normalised
    int K = 100;   // grid quantisation level
    PathSet paths;

    Index L() const noexcept { return paths.size(); }
};

struct Scenario
{
    int M = 1; // base-station antennas
    std::vector<UserConfig> users;

    std::size_t U() const noexcept { return users.size(); }
};

inline bool angle_in_range(double a) { return a >= 0.0 && a <= kPi; }

inline void validate(const UserConfig &u, std::size_t index)
{
    const std::string who = "user " + std::to_string(index) + ": ";
    if (u.N < 1)
        throw InvalidConfig(who + "N must be >= 1");
    if (!(u.W > 0.0) || !std::isfinite(u.W))
        throw InvalidConfig(who + "W must be > 0");
    if (!(u.P > 0.0) || !std::isfinite(u.P))
        throw InvalidConfig(who + "P must be > 0");
    if (u.K < u.N)
        throw InvalidConfig(who + "K must be >= N so the grid admits N distinct positions");
    if (u.paths.paths.empty())
        throw InvalidConfig(who + "at least one path is required");
    for (const Path &p : u.paths.paths)
    {
        if (!angle_in_range(p.aoa) || !angle_in_range(p.aod))
            throw InvalidConfig(who + "path angles must lie in [0, pi]");
        if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag()))
            throw InvalidConfig(who + "path gain must be finite");
    }
}

inline void validate(const Scenario &s)
{
    if (s.M < 1)
        throw InvalidConfig("M must be >= 1");
    if (s.users.empty())
        throw InvalidConfig("scenario needs at least one user");
    for (std::size_t u = 0; u < s.users.size(); ++u)
        validate(s.users[u], u);
}

// Antenna positions of one FAS: every entry in [0, W], pairwise distinct.
class PositionVector
{
public:
    PositionVector(std::vector<double> w, double aperture)
        : w_(std::move(w)), aperture_(aperture)
    {
        if (w_.empty())
            throw ContractViolation("position vector must hold at least one antenna");
        for (std::size_t i = 0; i < w_.size(); ++i)
        {
            if (!(w_[i] >= 0.0 && w_[i] <= aperture_))
                throw ContractViolation("antenna position " + std::to_string(w_[i]) + " outside [0, " +
                                        std::to_string(aperture_) + "]");
            for (std::size_t j = 0; j < i; ++j)
                if (w_[i] == w_[j])
                    throw ContractViolation("antenna positions must be pairwise distinct");
        }
    }

    std::size_t size() const noexcept { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    double aperture() const noexcept { return aperture_; }
    const std::vector<double> &values() const noexcept { return w_; }
    std::span<const double> span() const noexcept { return w_; }

    friend bool operator==(const PositionVector &, const PositionVector &) = default;

private:
    std::vector<double> w_;
    double aperture_;
};

// ---- Steering vectors ------------------------------------------------------

/// Base-station steering vector, entry m = exp(-j 2 pi d m cos(beta)) / sqrt(M).
inline CVector steering_rx(double beta, Index M)
{
    if (!angle_in_range(beta))
        throw DomainError("angle of arrival " + std::to_string(beta) + " outside [0, pi]");
    if (M < 1)
        throw ContractViolation("M must be >= 1");
    CVector a(M);
    const double k = 2.0 * kPi / kWavelength * kBsSpacing * std::cos(beta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(M));
    for (Index m = 0; m < M; ++m)
        a(m) = std::polar(scale, -k * static_cast<double>(m));
    return a;
}

/// FAS steering vector, entry n = exp(-j 2 pi w_n cos(theta)) / sqrt(N).
inline CVector steering_tx(double theta, std::span<const double> w)
{
    if (!angle_in_range(theta))
        throw DomainError("angle of departure " + std::to_string(theta) + " outside [0, pi]");
    const Index n = static_cast<Index>(w.size());
    if (n < 1)
        throw ContractViolation("position vector is empty");
    CVector a(n);
    const double k = 2.0 * kPi / kWavelength * std::cos(theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (Index i = 0; i < n; ++i)
        a(i) = std::polar(scale, -k * w[static_cast<std::size_t>(i)]);
    return a;
}

inline CVector steering_tx(double theta, const PositionVector &w) { return steering_tx(theta, w.span()); }

// Unit-modulus transmit phases a_l = exp(-j 2 pi w cos(theta_l)) for a single antenna at w.
inline CVector transmit_phases(std::span<const double> thetas, double w)
{
    CVector a(static_cast<Index>(thetas.size()));
    for (std::size_t l = 0; l < thetas.size(); ++l)
        a(static_cast<Index>(l)) = std::polar(1.0, -2.0 * kPi / kWavelength * w * std::cos(thetas[l]));
    return a;
}

/// A_R = [a_R(beta_1), ..., a_R(beta_L)], M x L.
inline CMatrix receive_steering_matrix(const PathSet &paths, Index M)
{
    CMatrix a(M, paths.size());
    for (Index l = 0; l < paths.size(); ++l)
        a.col(l) = steering_rx(paths.paths[static_cast<std::size_t>(l)].aoa, M);
    return a;
}

/// A_T(w) = [a_T(theta_1, w), ..., a_T(theta_L, w)], N x L.
inline CMatrix transmit_steering_matrix(const PathSet &paths, std::span<const double> w)
{
    CMatrix a(static_cast<Index>(w.size()), paths.size());
    for (Index l = 0; l < paths.size(); ++l)
        a.col(l) = steering_tx(paths.paths[static_cast<std::size_t>(l)].aod, w);
    return a;
}

/// G = sqrt(M N) A_R Gamma A_T(w)^H, M x N.
inline CMatrix channel_matrix(const UserConfig &user, std::span<const double> w, Index M)
{
    if (static_cast<int>(w.size()) != user.N)
        throw ContractViolation("position vector has " + std::to_string(w.size()) + " entries, user has N = " +
                                std::to_string(user.N));
    const double scale = std::sqrt(static_cast<double>(M) * static_cast<double>(user.N));
    const CMatrix ar = receive_steering_matrix(user.paths, M);
    const CMatrix at = transmit_steering_matrix(user.paths, w);
    return scale * ar * user.paths.gains().asDiagonal() * at.adjoint();
}

inline CMatrix channel_matrix(const UserConfig &user, const PositionVector &w, Index M)
{
    return channel_matrix(user, w.span(), M);
}

// ---- Position grids ---------------------------------------------------------------

/// Uniform grid {0, W/K, 2W/K, ..., W} with K + 1 points; the last point is W exactly.
inline std::vector<double> quantized_grid(double W, int K)
{
    if (!(W > 0.0) || K < 1)
        throw InvalidConfig("grid needs W > 0 and K >= 1");
    std::vector<double> g(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k < K; ++k)
        g[static_cast<std::size_t>(k)] = W * static_cast<double>(k) / static_cast<double>(K);
    g.back() = W;
    return g;
}

/// Grid {0, s, 2s, ...} inside [0, W]. When W/s is an integer (to 1e-9) this
/// is the quantized grid with K = W/s, so W itself is included.
inline std::vector<double> stepped_grid(double W, double step)
{
    if (!(W > 0.0) || !(step > 0.0))
        throw InvalidConfig("grid needs W > 0 and step > 0");
    const double ratio = W / step;
    const double nearest = std::round(ratio);
    if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
        return quantized_grid(W, static_cast<int>(nearest));
    std::vector<double> g;
    for (std::size_t k = 0;; ++k)
    {
        const double w = static_cast<double>(k) * step;
        if (w > W)
            break;
        g.push_back(w);
    }
    return g;
}

// ---- Random scenarios --------------------------------------------------------

struct ScenarioDims
{
    int U = 1;
    int M = 4;
    int N = 1;
    int L = 5;
    double W = 10.0;
    int K = 100;
    double snr_db = 10.0;
};

inline double power_from_snr_db(double snr_db) { return std::pow(10.0, snr_db / 10.0); }

/// Deterministic random scenario for a given seed.
///
/// Angles are i.i.d. uniform on [0, pi]; path gains are i.i.d. CN(0, 1/L), so
/// E[sum_l |gamma_l|^2] = 1 and the SNR is 10 log10(P). Draw order per user
/// and path is (gain re, gain im, aoa, aod).
inline Scenario random_scenario(std::uint64_t seed, const ScenarioDims &dims)
{
    if (dims.U < 1 || dims.M < 1 || dims.N < 1 || dims.L < 1)
        throw InvalidConfig("U, M, N and L must all be >= 1");
    if (!(dims.W > 0.0))
        throw InvalidConfig("W must be > 0");
    if (dims.K < dims.N)
        throw InvalidConfig("K must be >= N");
    if (!std::isfinite(dims.snr_db))
        throw InvalidConfig("snr_db must be finite");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> component(0.0, std::sqrt(0.5 / static_cast<double>(dims.L)));
    std::uniform_real_distribution<double> angle(0.0, kPi);

    Scenario s;
    s.M = dims.M;
    s.users.reserve(static_cast<std::size_t>(dims.U));
    for (int u = 0; u < dims.U; ++u)
    {
        UserConfig user;
        user.N = dims.N;
        user.W = dims.W;
        user.P = power_from_snr_db(dims.snr_db);
        user.K = dims.K;
        user.paths.paths.reserve(static_cast<std::size_t>(dims.L));
        for (int l = 0; l < dims.L; ++l)
        {
            const double re = component(rng);
            const double im = component(rng);
            const double aoa = angle(rng);
            const double aod = angle(rng);
            user.paths.paths.push_back({cdouble(re, im), aoa, aod});
        }
        s.users.push_back(std::move(user));
    }
    return s;
}

} // namespace fluidcap
