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

// Sum-capacity objective and its building blocks: interference-plus-noise
// covariances, whitened effective channels, and the closed-form capacity
// limits for single-antenna users.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "fluidcap/channel.hpp"
#include "fluidcap/numkit.hpp"

namespace fluidcap
{

// Transmit covariance Q with Q >= 0 and tr(Q) <= budget (both within kPsdTol).
class TxCovariance
{
public:
    TxCovariance(HermitianMatrix q, double budget)
        : q_(std::move(q)), budget_(budget)
    {
        if (!(budget_ >= 0.0))
            throw ContractViolation("covariance budget must be >= 0");
        const double tol = kPsdTol * std::max(1.0, budget_);
        if (min_eigenvalue(q_) < -tol)
            throw ContractViolation("transmit covariance is not PSD");
        if (q_.trace() > budget_ + tol)
            throw ContractViolation("transmit covariance trace " + std::to_string(q_.trace()) + " exceeds budget " +
                                    std::to_string(budget_));
    }

    static TxCovariance zero(Index n, double budget) { return {HermitianMatrix::zero(n), budget}; }
    static TxCovariance scalar(double q, double budget)
    {
        return {HermitianMatrix(CMatrix::Constant(1, 1, cdouble(q, 0.0))), budget};
    }

    const HermitianMatrix &matrix() const noexcept { return q_; }
    double budget() const noexcept { return budget_; }
    double trace() const { return q_.trace(); }
    Index dim() const noexcept { return q_.dim(); }

private:
    HermitianMatrix q_;
    double budget_;
};

struct SolveReport
{
    std::string algorithm;
    double capacity_bits = 0.0;
    std::vector<TxCovariance> covariances;
    std::vector<PositionVector> positions;
    std::vector<double> objective_trace;
    std::vector<double> rank_residuals;
    int iterations = 0;
    double runtime_ms = 0.0;

    // Diagnostics of the rank-one relaxation, when one ran: every outer MM
    // objective trace, the worst diagonal error and the smallest eigenvalue
    // seen across all accepted iterates.
    std::vector<std::vector<double>> mm_traces;
    double mm_max_diag_error = 0.0;
    double mm_min_eigenvalue = 0.0;
    // Capacity at the initial positions (reported alongside the mapped result).
    double initial_capacity_bits = 0.0;

    double max_rank_residual() const
    {
        double r = 0.0;
        for (double x : rank_residuals)
            r = std::max(r, x);
        return r;
    }
};

// ---- Channel-level primitives -----------------------------------------------

namespace detail
{

inline void check_covariance_shapes(std::span<const CMatrix> channels, std::span<const TxCovariance> qs)
{
    if (channels.size() != qs.size())
        throw ContractViolation("channel and covariance lists differ in length");
    for (std::size_t u = 0; u < channels.size(); ++u)
    {
        if (channels[u].rows() != channels.front().rows())
            throw ContractViolation("channels disagree on the receive dimension");
        if (channels[u].cols() != qs[u].dim())
            throw ContractViolation("covariance " + std::to_string(u) + " does not match its channel width");
    }
}

} // namespace detail

/// log2 | sum_u G_u Q_u G_u^H + I |.
inline double sum_capacity(std::span<const CMatrix> channels, std::span<const TxCovariance> qs)
{
    detail::check_covariance_shapes(channels, qs);
    if (channels.empty())
        return 0.0;
    const Index m = channels.front().rows();
    CMatrix s = CMatrix::Identity(m, m);
    for (std::size_t u = 0; u < channels.size(); ++u)
        s.noalias() += channels[u] * qs[u].matrix().matrix() * channels[u].adjoint();
    return logdet_hpd(HermitianMatrix(0.5 * (s + s.adjoint())));
}

/// Omega_u = sum_{u' != u} G_u' Q_u' G_u'^H + I.
inline HermitianMatrix interference_matrix(std::span<const CMatrix> channels, std::span<const TxCovariance> qs,
                                           std::size_t u)
{
    detail::check_covariance_shapes(channels, qs);
    if (u >= channels.size())
        throw ContractViolation("user index out of range");
    const Index m = channels.front().rows();
    CMatrix s = CMatrix::Identity(m, m);
    for (std::size_t v = 0; v < channels.size(); ++v)
        if (v != u)
            s.noalias() += channels[v] * qs[v].matrix().matrix() * channels[v].adjoint();
    return HermitianMatrix(0.5 * (s + s.adjoint()));
}

// Omega^{-1} = S Lambda S^H, obtained from the eigendecomposition of Omega.
struct Whitener
{
    CMatrix left;          // Lambda^{1/2} S^H
    double logdet_omega;   // log2 |Omega|
    bool identity = false; // Omega == I exactly, left is the identity
};

inline Whitener make_whitener(const HermitianMatrix &omega)
{
    const Index m = omega.dim();
    if (omega.matrix() == CMatrix::Identity(m, m))
        return {CMatrix::Identity(m, m), 0.0, true};
    const Spectrum s = eigh(omega);
    if (!(s.values(0) > 0.0))
        throw DomainError("interference matrix is not positive definite");
    const RVector inv_sqrt = s.values.cwiseSqrt().cwiseInverse();
    Whitener w;
    w.left = inv_sqrt.cast<cdouble>().asDiagonal() * s.vectors.adjoint();
    w.logdet_omega = s.values.array().log().sum() / kLn2;
    return w;
}

/// G_bar = Lambda^{1/2} S^H G, so that G_bar^H G_bar = G^H Omega^{-1} G.
inline CMatrix whiten(const Whitener &w, const CMatrix &g)
{
    if (w.identity)
        return g;
    return w.left * g;
}

inline CMatrix effective_channel(const HermitianMatrix &omega, const CMatrix &g)
{
    return whiten(make_whitener(omega), g);
}

// ---- Scenario-level wrappers -----------------------------------------------------

inline std::vector<CMatrix> channels_of(const Scenario &s, std::span<const PositionVector> ws)
{
    if (ws.size() != s.users.size())
        throw ContractViolation("need one position vector per user");
    std::vector<CMatrix> g;
    g.reserve(ws.size());
    for (std::size_t u = 0; u < ws.size(); ++u)
        g.push_back(channel_matrix(s.users[u], ws[u], s.M));
    return g;
}

namespace detail
{

inline void check_feasible(const Scenario &s, std::span<const TxCovariance> qs, std::span<const PositionVector> ws)
{
    if (qs.size() != s.users.size() || ws.size() != s.users.size())
        throw ContractViolation("need one covariance and one position vector per user");
    for (std::size_t u = 0; u < qs.size(); ++u)
    {
        const UserConfig &user = s.users[u];
        if (qs[u].dim() != user.N || static_cast<int>(ws[u].size()) != user.N)
            throw ContractViolation("user " + std::to_string(u) + " has N = " + std::to_string(user.N) +
                                    " but covariance/positions disagree");
        if (qs[u].trace() > user.P + kPsdTol * std::max(1.0, user.P))
            throw ContractViolation("user " + std::to_string(u) + " covariance exceeds its power budget");
        if (ws[u].aperture() > user.W)
            throw ContractViolation("user " + std::to_string(u) + " positions exceed the FAS length");
    }
}

} // namespace detail

inline double sum_capacity(const Scenario &s, std::span<const TxCovariance> qs, std::span<const PositionVector> ws)
{
    detail::check_feasible(s, qs, ws);
    const std::vector<CMatrix> g = channels_of(s, ws);
    return sum_capacity(g, qs);
}

inline HermitianMatrix interference_matrix(const Scenario &s, std::span<const TxCovariance> qs,
                                           std::span<const PositionVector> ws, std::size_t u)
{
    detail::check_feasible(s, qs, ws);
    const std::vector<CMatrix> g = channels_of(s, ws);
    return interference_matrix(g, qs, u);
}

inline CMatrix effective_channel(const Scenario &s, const HermitianMatrix &omega, std::size_t u,
                                 const PositionVector &w)
{
    if (omega.dim() != s.M)
        throw ContractViolation("interference matrix must be M x M");
    return effective_channel(omega, channel_matrix(s.users.at(u), w, s.M));
}

/// Large-M limit for a single-antenna user: log2(sum_l P M |gamma_l|^2 + 1).
inline double c0_large_m(const UserConfig &user, Index M)
{
    double acc = 0.0;
    for (const Path &p : user.paths.paths)
        acc += user.P * static_cast<double>(M) * std::norm(p.gain);
    return std::log2(acc + 1.0);
}

/// Capacity when every user has a single path and transmits at full power
/// along its transmit steering vector:
/// log2 | sum_u M N_u P_u |gamma_u|^2 a_R a_R^H + I |.
inline double single_path_capacity(const Scenario &s)
{
    CMatrix acc = CMatrix::Identity(s.M, s.M);
    for (const UserConfig &u : s.users)
    {
        if (u.L() != 1)
            throw ContractViolation("single_path_capacity needs L = 1 for every user");
        const Path &p = u.paths.paths.front();
        const CVector a = steering_rx(p.aoa, s.M);
        acc += static_cast<double>(s.M) * u.N * u.P * std::norm(p.gain) * (a * a.adjoint());
    }
    return logdet_hpd(HermitianMatrix(0.5 * (acc + acc.adjoint())));
}

namespace detail
{

// log2(a^T Psi a^* + 1) without validating Psi.
inline double quadratic_capacity(const CMatrix &psi, const CVector &a)
{
    const cdouble q = (a.transpose() * psi * a.conjugate())(0, 0);
    return std::log2(std::max(q.real(), 0.0) + 1.0);
}

} // namespace detail

/// Single-antenna conditional capacity log2(a^T Psi a^* + 1) with
/// a_l = exp(-j 2 pi w cos theta_l).
inline double quadratic_capacity_1ant(const HermitianMatrix &psi, std::span<const double> thetas, double w)
{
    if (psi.dim() != static_cast<Index>(thetas.size()))
        throw ContractViolation("Psi dimension must match the number of paths");
    const double tol = kPsdTol * std::max(1.0, psi.matrix().cwiseAbs().maxCoeff());
    if (min_eigenvalue(psi) < -tol)
        throw DomainError("Psi is not positive semidefinite");
    return detail::quadratic_capacity(psi.matrix(), transmit_phases(thetas, w));
}

} // namespace fluidcap
