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

// Position optimisation for users with a single movable antenna: the
// path-domain quadratic form, the two-path closed form and the grid search.

#include <cmath>
#include <optional>
#include <utility>

#include "fluidcap/capacity.hpp"

namespace fluidcap
{

/// Psi = P M Gamma^H A_R^H Omega^{-1} A_R Gamma (L x L), so that a single
/// antenna at w achieves log2(a^T Psi a^* + 1).
inline HermitianMatrix psi_matrix(const UserConfig &user, Index M, const HermitianMatrix &omega)
{
    if (omega.dim() != M)
        throw ContractViolation("interference matrix must be M x M");
    const CMatrix ar = receive_steering_matrix(user.paths, M);
    const CVector gains = user.paths.gains();
    const CMatrix arg = ar * gains.asDiagonal();
    Eigen::LLT<CMatrix> llt(omega.matrix());
    if (llt.info() != Eigen::Success)
        throw DomainError("interference matrix is not positive definite");
    const CMatrix x = llt.matrixL().solve(arg);
    const CMatrix psi = user.P * static_cast<double>(M) * (x.adjoint() * x);
    return HermitianMatrix(0.5 * (psi + psi.adjoint()));
}

// ---- Two paths ---------------------------------------------------------------------

// With L = 2 the objective is
//   log2(psi1 + psi3 + 1 + 2 Re(psi2) cos(rho w) + 2 Im(psi2) sin(rho w)),
// rho = 2 pi (cos theta_1 - cos theta_2).
struct TwoPathParams
{
    double psi1 = 0.0;
    cdouble psi2{};
    double psi3 = 0.0;
    double rho = 0.0;
    double mu = 0.0; // atan(Re psi2 / Im psi2), only meaningful when Im psi2 != 0
    double w0 = 0.0; // smallest w >= 0 maximising the sinusoid
};

inline TwoPathParams two_path_params(const HermitianMatrix &psi, double theta1, double theta2)
{
    if (psi.dim() != 2)
        throw ContractViolation("two-path parameters need a 2 x 2 Psi");
    TwoPathParams p;
    p.psi1 = psi(0, 0).real();
    p.psi2 = psi(0, 1);
    p.psi3 = psi(1, 1).real();
    p.rho = 2.0 * kPi * (std::cos(theta1) - std::cos(theta2));
    if (p.rho == 0.0)
        throw DegeneratePaths("both paths leave at the same angle");
    if (p.psi2.imag() != 0.0)
    {
        p.mu = std::atan(p.psi2.real() / p.psi2.imag());
        // sin(rho w + mu) has to reach +1 when Im psi2 > 0 and -1 otherwise.
        const double target = p.psi2.imag() > 0.0 ? 0.5 * kPi : 1.5 * kPi;
        double phase = target - p.mu; // in [0, 2 pi]
        if (p.rho < 0.0)
            phase -= 2.0 * kPi; // in [-2 pi, 0]
        p.w0 = phase / p.rho;
    }
    return p;
}

/// Optimal single-antenna position for two paths on [0, W].
///
/// `capacity_at(w)` evaluates the objective and is used only to break the
/// boundary comparison when the interior optimum lies beyond W.
template <class CapacityAt>
double two_path_w_star(const TwoPathParams &p, double W, CapacityAt &&capacity_at)
{
    if (p.rho == 0.0)
        throw DegeneratePaths("both paths leave at the same angle");
    if (p.psi2.imag() == 0.0)
    {
        if (p.psi2.real() >= 0.0)
            return 0.0;
        const double half_period = kPi / std::abs(p.rho);
        return half_period <= W ? half_period : W;
    }
    // Every maximiser is w0 + 2 pi k / |rho|; w0 is the smallest non-negative one.
    if (p.w0 >= 0.0 && p.w0 <= W)
        return p.w0;
    const double c0 = capacity_at(0.0);
    const double cw = capacity_at(W);
    return cw > c0 ? W : 0.0;
}

// ---- Grid search -------------------------------------------------------------------

struct GridChoice
{
    double w = 0.0;
    double capacity_bits = 0.0;
};

namespace detail
{

inline std::vector<double> aods_of(const UserConfig &user) { return user.paths.aods(); }

// A later grid point has to beat the incumbent by more than this to win.
inline constexpr double kGridTieTol = 1e-12;

} // namespace detail

/// Best point of `grid` for log2(a^T Psi a^* + 1); ties go to the smallest w.
inline GridChoice grid_best_w(const HermitianMatrix &psi, std::span<const double> thetas,
                              std::span<const double> grid)
{
    if (grid.empty())
        throw ContractViolation("empty position grid");
    GridChoice best{grid[0], detail::quadratic_capacity(psi.matrix(), transmit_phases(thetas, grid[0]))};
    for (std::size_t k = 1; k < grid.size(); ++k)
    {
        const double c = detail::quadratic_capacity(psi.matrix(), transmit_phases(thetas, grid[k]));
        if (c > best.capacity_bits + detail::kGridTieTol)
            best = {grid[k], c};
    }
    return best;
}

/// Grid search on {0, W/K, ..., W} for one single-antenna user facing `omega`.
inline GridChoice grid_best_w(const UserConfig &user, Index M, const HermitianMatrix &omega, int K)
{
    if (K < 1)
        throw ContractViolation("quantization level must be >= 1");
    const HermitianMatrix psi = psi_matrix(user, M, omega);
    const std::vector<double> thetas = detail::aods_of(user);
    const std::vector<double> grid = quantized_grid(user.W, K);
    return grid_best_w(psi, thetas, grid);
}

/// One position update for a single-antenna user.
///
/// One path: the position does not matter, so 0. Two paths: closed form
/// (collapsing to 0 when both paths share an angle). Otherwise: grid search.
/// The incumbent, when given, is kept unless the candidate is better.
inline double single_user_position_update(const UserConfig &user, Index M, const HermitianMatrix &omega, int K,
                                          std::optional<double> incumbent = std::nullopt)
{
    if (user.N != 1)
        throw WrongSolver("single-antenna position update needs N = 1");
    const HermitianMatrix psi = psi_matrix(user, M, omega);
    const std::vector<double> thetas = detail::aods_of(user);
    auto cap = [&](double w) { return detail::quadratic_capacity(psi.matrix(), transmit_phases(thetas, w)); };

    double candidate = 0.0;
    if (user.L() == 2)
    {
        try
        {
            candidate = two_path_w_star(two_path_params(psi, thetas[0], thetas[1]), user.W, cap);
        }
        catch (const DegeneratePaths &)
        {
            candidate = 0.0;
        }
    }
    else if (user.L() > 2)
    {
        candidate = grid_best_w(psi, thetas, quantized_grid(user.W, K)).w;
    }
    if (incumbent && cap(candidate) < cap(*incumbent) - detail::kGridTieTol)
        return *incumbent;
    return candidate;
}

} // namespace fluidcap
