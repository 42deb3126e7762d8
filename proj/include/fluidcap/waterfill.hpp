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

// Point-to-point water-filling, iterative water-filling for the multiple
// access channel, and the two path-domain capacity bounds built on them.

#include <algorithm>
#include <numeric>
#include <vector>

#include "fluidcap/capacity.hpp"

namespace fluidcap
{

// Powers over eigenmodes with channel gains `gains` (sigma_k^2) and budget P.
struct ModePowers
{
    RVector powers;
    double water_level = 0.0; // mu; 0 when nothing is allocated
};

/// Classic water-filling: p_k = max(0, mu - 1/g_k) with sum p_k = P.
///
/// The water level is solved exactly: modes are sorted by gain and the
/// largest active set whose weakest mode stays under water is kept.
inline ModePowers waterfill_gains(const RVector &gains, double budget)
{
    if (!(budget >= 0.0))
        throw ContractViolation("water-filling budget must be >= 0");
    const Index n = gains.size();
    ModePowers out{RVector::Zero(n), 0.0};
    if (n == 0 || budget == 0.0)
        return out;
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return gains(a) > gains(b); });

    double inv_sum = 0.0;
    double level = 0.0;
    Index active = 0;
    for (Index k = 0; k < n; ++k)
    {
        const double g = gains(order[static_cast<std::size_t>(k)]);
        if (!(g > 0.0))
            break;
        const double candidate = (budget + inv_sum + 1.0 / g) / static_cast<double>(k + 1);
        if (candidate <= 1.0 / g)
            break;
        inv_sum += 1.0 / g;
        level = candidate;
        active = k + 1;
    }
    for (Index k = 0; k < active; ++k)
    {
        const Index i = order[static_cast<std::size_t>(k)];
        out.powers(i) = std::max(0.0, level - 1.0 / gains(i));
    }
    out.water_level = level;
    return out;
}

struct WaterfillResult
{
    TxCovariance covariance;
    double capacity_bits = 0.0;
    double water_level = 0.0;
    double kkt_residual = 0.0;
};

namespace detail
{

// Relative threshold below which an eigenmode of G^H G counts as empty.
inline constexpr double kModeTol = 1e-14;

} // namespace detail

/// KKT residual of max log|I + G Q G^H| s.t. Q >= 0, tr Q <= P at Q.
///
/// With grad = G^H (I + G Q G^H)^{-1} G and nu = 1/mu the optimality
/// conditions are tr Q = P, (nu I - grad) Q = 0 and grad <= nu I. The
/// residual is the largest violation, scaled by the problem size.
inline double waterfill_kkt_residual(const CMatrix &g, const TxCovariance &q, double water_level)
{
    const Index m = g.rows();
    const Index n = g.cols();
    const CMatrix &qm = q.matrix().matrix();
    if (water_level <= 0.0)
        return qm.norm();
    const CMatrix s = CMatrix::Identity(m, m) + g * qm * g.adjoint();
    const CMatrix grad_raw = g.adjoint() * s.ldlt().solve(g);
    const CMatrix grad = 0.5 * (grad_raw + grad_raw.adjoint());
    const double nu = 1.0 / water_level;
    const CMatrix gap = grad - nu * CMatrix::Identity(n, n);
    const double trace_res = std::abs(q.trace() - q.budget()) / std::max(1.0, q.budget());
    const double slack_res = (gap * qm).norm() / std::max(1.0, qm.norm());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(gap, Eigen::EigenvaluesOnly);
    const double dual_res = std::max(0.0, es.eigenvalues()(n - 1)) / std::max(1.0, nu);
    return std::max({trace_res, slack_res, dual_res});
}

/// Water-filling over the right singular vectors of G.
inline WaterfillResult waterfill(const CMatrix &g, double budget)
{
    const Index n = g.cols();
    if (n < 1 || g.rows() < 1)
        throw ContractViolation("water-filling needs a non-empty channel");
    if (!(budget >= 0.0))
        throw ContractViolation("water-filling budget must be >= 0");
    const CMatrix gram_raw = g.adjoint() * g;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (gram_raw + gram_raw.adjoint()));
    RVector gains = es.eigenvalues();
    const double top = gains.size() > 0 ? gains.maxCoeff() : 0.0;
    for (Index k = 0; k < gains.size(); ++k)
        if (!(gains(k) > detail::kModeTol * top) || top <= 0.0)
            gains(k) = 0.0;

    const ModePowers mp = waterfill_gains(gains, budget);
    const CMatrix &v = es.eigenvectors();
    CMatrix qm = v * mp.powers.cast<cdouble>().asDiagonal() * v.adjoint();
    qm = (0.5 * (qm + qm.adjoint())).eval();
    // The trace of the reassembled matrix may exceed the budget by rounding.
    const double tr = qm.trace().real();
    if (tr > budget && tr > 0.0)
        qm *= budget / tr;

    double cap = 0.0;
    for (Index k = 0; k < gains.size(); ++k)
        cap += std::log2(1.0 + gains(k) * mp.powers(k));

    WaterfillResult r{TxCovariance(HermitianMatrix(qm), budget), cap, mp.water_level, 0.0};
    r.kkt_residual = waterfill_kkt_residual(g, r.covariance, mp.water_level);
    return r;
}

inline TxCovariance waterfill_p2p(const CMatrix &g, double budget) { return waterfill(g, budget).covariance; }

// ---- Iterative water-filling -------------------------------------------------

struct IwfOptions
{
    double tol = 1e-8; // bits, change over a full cycle
    int max_cycles = 200;
};

struct IwfResult
{
    std::vector<TxCovariance> covariances;
    double capacity_bits = 0.0;
    std::vector<double> trace; // sum capacity after every single-user update
    int cycles = 0;
};

/// Cyclic per-user water-filling against the whitened interference.
///
/// Starts from `init` when given (zero covariances otherwise). Every update
/// is a maximisation of the sum capacity in one user's covariance, so the
/// trace is non-decreasing. Throws NonConvergenceWith<IwfResult> on the cap.
inline IwfResult iterative_waterfill(std::span<const CMatrix> channels, std::span<const double> budgets,
                                     const IwfOptions &opt = {}, std::span<const TxCovariance> init = {})
{
    if (channels.empty())
        throw ContractViolation("iterative water-filling needs at least one user");
    if (channels.size() != budgets.size())
        throw ContractViolation("one budget per channel required");
    const Index m = channels.front().rows();
    for (const CMatrix &g : channels)
        if (g.rows() != m)
            throw ContractViolation("channels disagree on the receive dimension");

    IwfResult res;
    if (!init.empty())
    {
        if (init.size() != channels.size())
            throw ContractViolation("initial covariance list has the wrong length");
        res.covariances.assign(init.begin(), init.end());
    }
    else
    {
        for (std::size_t u = 0; u < channels.size(); ++u)
            res.covariances.push_back(TxCovariance::zero(channels[u].cols(), budgets[u]));
    }
    double current = sum_capacity(channels, res.covariances);

    for (int cycle = 1; cycle <= opt.max_cycles; ++cycle)
    {
        const double start = current;
        for (std::size_t u = 0; u < channels.size(); ++u)
        {
            const HermitianMatrix omega = interference_matrix(channels, res.covariances, u);
            const Whitener wh = make_whitener(omega);
            WaterfillResult wf = waterfill(whiten(wh, channels[u]), budgets[u]);
            const double candidate = wh.logdet_omega + wf.capacity_bits;
            // Rounding can make an optimal update look marginally worse.
            if (candidate >= current)
            {
                res.covariances[u] = std::move(wf.covariance);
                current = candidate;
            }
            res.trace.push_back(current);
        }
        res.cycles = cycle;
        if (current - start < opt.tol)
        {
            res.capacity_bits = sum_capacity(channels, res.covariances);
            return res;
        }
    }
    res.capacity_bits = sum_capacity(channels, res.covariances);
    throw NonConvergenceWith<IwfResult>(
        "iterative water-filling did not converge in " + std::to_string(opt.max_cycles) + " cycles", res);
}

// ---- Path-domain bounds ------------------------------------------------------

// Bounds are compared against solver outputs with a 1e-9 margin, so they are
// solved well past the default cycle tolerance.
inline constexpr IwfOptions kBoundIwfOptions{1e-12, 2000};

namespace detail
{

// sqrt(M N_u) A_R Gamma for every user.
inline std::vector<CMatrix> path_domain_channels(const Scenario &s)
{
    std::vector<CMatrix> out;
    out.reserve(s.users.size());
    for (const UserConfig &u : s.users)
    {
        const CMatrix ar = receive_steering_matrix(u.paths, s.M);
        const CVector gains = u.paths.gains();
        out.push_back(std::sqrt(static_cast<double>(s.M) * u.N) * (ar * gains.asDiagonal()));
    }
    return out;
}

inline IwfResult path_domain_iwf(const Scenario &s, bool scale_by_paths, const IwfOptions &opt)
{
    if (s.users.empty())
        throw ContractViolation("scenario has no users");
    std::vector<double> budgets;
    for (const UserConfig &u : s.users)
    {
        if (!(u.P >= 0.0))
            throw ContractViolation("power budgets must be >= 0");
        budgets.push_back(scale_by_paths ? u.L() * u.P : u.P);
    }
    const std::vector<CMatrix> g = path_domain_channels(s);
    return iterative_waterfill(g, budgets, opt);
}

} // namespace detail

/// Upper bound on the sum capacity over all positions: water-filling on the
/// path-domain channels sqrt(M N_u) A_R Gamma_u with budgets L_u P_u.
inline double capacity_upper_bound(const Scenario &s, const IwfOptions &opt = kBoundIwfOptions)
{
    return detail::path_domain_iwf(s, true, opt).capacity_bits;
}

/// Large-N approximation: the same path-domain channels with budgets P_u.
inline double capacity_approx(const Scenario &s, const IwfOptions &opt = kBoundIwfOptions)
{
    return detail::path_domain_iwf(s, false, opt).capacity_bits;
}

} // namespace fluidcap
