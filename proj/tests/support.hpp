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

// Helpers and independent reference computations shared by the tests. The
// references deliberately avoid the library's own code paths (eigenvalues
// instead of Cholesky, SVD instead of Gram eigendecompositions, explicit
// path sums instead of factored channels).

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "fluidcap/fluidcap.hpp"

namespace testing_support
{

using namespace fluidcap;

inline CMatrix random_matrix(std::mt19937_64 &rng, Index rows, Index cols)
{
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = cdouble(n(rng), n(rng));
    return m;
}

inline CMatrix random_hermitian(std::mt19937_64 &rng, Index n)
{
    const CMatrix a = random_matrix(rng, n, n);
    return 0.5 * (a + a.adjoint());
}

inline CMatrix random_hpd(std::mt19937_64 &rng, Index n)
{
    const CMatrix a = random_matrix(rng, n, n);
    CMatrix h = a * a.adjoint() + CMatrix::Identity(n, n);
    return 0.5 * (h + h.adjoint());
}

// Random PSD matrix scaled to trace `trace`, with random rank.
inline CMatrix random_psd_with_trace(std::mt19937_64 &rng, Index n, double trace)
{
    std::uniform_int_distribution<Index> rk(1, n);
    const CMatrix a = random_matrix(rng, n, rk(rng));
    CMatrix q = a * a.adjoint();
    q = (0.5 * (q + q.adjoint())).eval();
    return q * (trace / q.trace().real());
}

// Random point of {X >= 0, diag(X) = c}.
inline CMatrix random_elliptope_point(std::mt19937_64 &rng, Index n, double c)
{
    std::uniform_int_distribution<Index> rk(1, n);
    CMatrix v = random_matrix(rng, rk(rng), n);
    for (Index j = 0; j < n; ++j)
        v.col(j) *= std::sqrt(c) / v.col(j).norm();
    CMatrix x = v.adjoint() * v;
    for (Index i = 0; i < n; ++i)
        x(i, i) = c;
    return 0.5 * (x + x.adjoint());
}

// log2 det(I + A) via eigenvalues of the Hermitian matrix A.
inline double logdet_eye_plus(const CMatrix &a)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (a + a.adjoint()), Eigen::EigenvaluesOnly);
    double acc = 0.0;
    for (Index i = 0; i < es.eigenvalues().size(); ++i)
        acc += std::log2(1.0 + es.eigenvalues()(i));
    return acc;
}

// log2 | sum_u G_u Q_u G_u^H + I |, by eigenvalues.
inline double ref_sum_capacity(const std::vector<CMatrix> &g, const std::vector<CMatrix> &q)
{
    CMatrix acc = CMatrix::Zero(g.front().rows(), g.front().rows());
    for (std::size_t u = 0; u < g.size(); ++u)
        acc += g[u] * q[u] * g[u].adjoint();
    return logdet_eye_plus(acc);
}

// Water-filled capacity of G from its singular values (bisection on the level).
inline double ref_waterfill_capacity(const CMatrix &g, double budget)
{
    Eigen::JacobiSVD<CMatrix> svd(g);
    std::vector<double> gains;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
    {
        const double s2 = svd.singularValues()(i) * svd.singularValues()(i);
        if (s2 > 1e-14 * std::max(1.0, svd.singularValues()(0) * svd.singularValues()(0)))
            gains.push_back(s2);
    }
    if (gains.empty() || budget <= 0.0)
        return 0.0;
    double lo = 0.0, hi = budget + 1.0 / *std::min_element(gains.begin(), gains.end());
    for (int it = 0; it < 200; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        double used = 0.0;
        for (double s : gains)
            used += std::max(0.0, mid - 1.0 / s);
        (used > budget ? hi : lo) = mid;
    }
    double cap = 0.0;
    for (double s : gains)
        cap += std::log2(1.0 + s * std::max(0.0, lo - 1.0 / s));
    return cap;
}

// Channel from the explicit path sum sqrt(MN) sum_l gamma_l a_R(beta_l) a_T(theta_l, w)^H.
inline CMatrix ref_channel(const UserConfig &u, const std::vector<double> &w, Index M)
{
    const Index n = static_cast<Index>(w.size());
    CMatrix g = CMatrix::Zero(M, n);
    for (const Path &p : u.paths.paths)
    {
        CVector ar(M), at(n);
        for (Index m = 0; m < M; ++m)
            ar(m) = std::polar(1.0 / std::sqrt(double(M)), -kPi * double(m) * std::cos(p.aoa));
        for (Index k = 0; k < n; ++k)
            at(k) = std::polar(1.0 / std::sqrt(double(n)), -2.0 * kPi * w[static_cast<std::size_t>(k)] * std::cos(p.aod));
        g += std::sqrt(double(M) * double(n)) * p.gain * ar * at.adjoint();
    }
    return g;
}

// log2 | sum_u M N_u P_u |gamma_u|^2 a_R a_R^H + I | for single-path users,
// written out directly from the steering vectors.
inline double ref_single_path_capacity(const Scenario &s)
{
    CMatrix acc = CMatrix::Zero(s.M, s.M);
    for (const UserConfig &u : s.users)
    {
        const Path &p = u.paths.paths.front();
        CVector ar(s.M);
        for (Index m = 0; m < s.M; ++m)
            ar(m) = std::polar(1.0 / std::sqrt(double(s.M)), -kPi * double(m) * std::cos(p.aoa));
        acc += double(s.M) * u.N * u.P * std::norm(p.gain) * ar * ar.adjoint();
    }
    return logdet_eye_plus(acc);
}

inline Scenario scenario(std::uint64_t seed, int U, int M, int N, int L, double W = 10.0, int K = 100,
                         double snr_db = 10.0)
{
    ScenarioDims d;
    d.U = U;
    d.M = M;
    d.N = N;
    d.L = L;
    d.W = W;
    d.K = K;
    d.snr_db = snr_db;
    return random_scenario(seed, d);
}

// Capacity of a report's (Q, w), recomputed from scratch.
inline double recompute(const Scenario &s, const SolveReport &r)
{
    std::vector<CMatrix> g, q;
    for (std::size_t u = 0; u < s.users.size(); ++u)
    {
        g.push_back(ref_channel(s.users[u], r.positions[u].values(), s.M));
        q.push_back(r.covariances[u].matrix().matrix());
    }
    return ref_sum_capacity(g, q);
}

// Feasibility of a report for the original problem: PSD, trace, box, distinctness.
inline bool feasible(const Scenario &s, const SolveReport &r, double tol = 1e-9)
{
    if (r.covariances.size() != s.users.size() || r.positions.size() != s.users.size())
        return false;
    for (std::size_t u = 0; u < s.users.size(); ++u)
    {
        const UserConfig &user = s.users[u];
        const CMatrix &q = r.covariances[u].matrix().matrix();
        Eigen::SelfAdjointEigenSolver<CMatrix> es(q, Eigen::EigenvaluesOnly);
        if (q.rows() != user.N || es.eigenvalues()(0) < -tol * std::max(1.0, user.P))
            return false;
        if (q.trace().real() > user.P + tol * std::max(1.0, user.P))
            return false;
        const auto &w = r.positions[u].values();
        if (static_cast<int>(w.size()) != user.N)
            return false;
        for (std::size_t i = 0; i < w.size(); ++i)
        {
            if (w[i] < 0.0 || w[i] > user.W)
                return false;
            for (std::size_t j = 0; j < i; ++j)
                if (w[i] == w[j])
                    return false;
        }
    }
    return true;
}

} // namespace testing_support
