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

// Rank-one relaxation of antenna positions.
//
// A position w of an antenna facing paths with departure angles theta_l is
// encoded by the rank-one matrix J = c a^* a^T, a_l = exp(-j 2 pi w cos theta_l).
// Relaxing J to the elliptope {J >= 0, diag(J) = c} and penalising
// ||J||_* - ||J||_2 gives a difference-of-convex program that is solved by
// majorisation-minimisation, each surrogate by projected gradient ascent.

#include <concepts>
#include <set>
#include <vector>

#include "fluidcap/capacity.hpp"

namespace fluidcap
{

class RankOneBlock
{
public:
    static constexpr double kTol = 1e-9;

    RankOneBlock(HermitianMatrix j, double diag_value)
        : j_(std::move(j)), c_(diag_value)
    {
        if (!(c_ > 0.0))
            throw ContractViolation("block diagonal value must be positive");
        for (Index i = 0; i < j_.dim(); ++i)
            if (std::abs(j_(i, i).real() - c_) > kTol)
                throw ContractViolation("block diagonal deviates from " + std::to_string(c_));
        if (min_eigenvalue(j_) < -kTol)
            throw ContractViolation("block is not PSD");
    }

    const HermitianMatrix &matrix() const noexcept { return j_; }
    double diag_value() const noexcept { return c_; }
    Index dim() const noexcept { return j_.dim(); }

private:
    HermitianMatrix j_;
    double c_;
};

/// c a^* a^T with a_l = exp(-j 2 pi w cos theta_l).
inline RankOneBlock j_outer(double w, std::span<const double> thetas, double diag_value)
{
    const CVector a = transmit_phases(thetas, w);
    CMatrix j = diag_value * (a.conjugate() * a.transpose());
    for (Index i = 0; i < j.rows(); ++i)
        j(i, i) = diag_value;
    return {HermitianMatrix(j), diag_value};
}

/// ||J||_* - ||J||_2; zero exactly when J has rank one.
inline double rank_residual(const HermitianMatrix &j)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(j.matrix(), Eigen::EigenvaluesOnly);
    const RVector ev = es.eigenvalues().cwiseAbs();
    return std::max(0.0, ev.sum() - ev.maxCoeff());
}

inline double rank_residual(const RankOneBlock &b) { return rank_residual(b.matrix()); }

// ---- Objectives ----------------------------------------------------------------------

// A smooth concave objective of a list of Hermitian blocks.
template <class T>
concept BlockObjective = requires(const T &f, const std::vector<CMatrix> &blocks) {
    { f.value(blocks) } -> std::convertible_to<double>;
    { f.gradient(blocks) } -> std::convertible_to<std::vector<CMatrix>>;
    { f.block_count() } -> std::convertible_to<std::size_t>;
};

/// f(J) = log2 det(I + sum_k B_k J_k B_k^H).
///
/// Only B^H B matters, so when the receive dimension exceeds the total block
/// size T the factors are replaced by the square root of the stacked Gram
/// matrix and everything runs at T x T.
class LogDetObjective
{
public:
    explicit LogDetObjective(std::vector<CMatrix> factors)
    {
        if (factors.empty())
            throw ContractViolation("log-det objective needs at least one block");
        const Index d = factors.front().rows();
        Index total = 0;
        for (const CMatrix &b : factors)
        {
            if (b.rows() != d || b.cols() < 1)
                throw ContractViolation("block factors must share their row count");
            offsets_.push_back(total);
            sizes_.push_back(b.cols());
            total += b.cols();
        }
        if (d <= total)
        {
            factors_ = std::move(factors);
            return;
        }
        CMatrix stacked(d, total);
        for (std::size_t k = 0; k < factors.size(); ++k)
            stacked.middleCols(offsets_[k], sizes_[k]) = factors[k];
        const CMatrix gram = stacked.adjoint() * stacked;
        const CMatrix root = psd_sqrt(HermitianMatrix(0.5 * (gram + gram.adjoint())));
        for (std::size_t k = 0; k < sizes_.size(); ++k)
            factors_.push_back(root.middleCols(offsets_[k], sizes_[k]));
    }

    std::size_t block_count() const noexcept { return factors_.size(); }
    Index block_size(std::size_t k) const { return sizes_.at(k); }

    double value(const std::vector<CMatrix> &blocks) const { return logdet_hpd(HermitianMatrix(system(blocks))); }

    /// d f / d J_k = B_k^H S^{-1} B_k / ln 2.
    std::vector<CMatrix> gradient(const std::vector<CMatrix> &blocks) const
    {
        const CMatrix s = system(blocks);
        Eigen::LLT<CMatrix> llt(s);
        if (llt.info() != Eigen::Success)
            throw DomainError("log-det system matrix is not positive definite");
        std::vector<CMatrix> out;
        out.reserve(factors_.size());
        for (const CMatrix &b : factors_)
        {
            const CMatrix x = llt.matrixL().solve(b);
            CMatrix g = (x.adjoint() * x) / kLn2;
            out.push_back(0.5 * (g + g.adjoint()));
        }
        return out;
    }

private:
    CMatrix system(const std::vector<CMatrix> &blocks) const
    {
        if (blocks.size() != factors_.size())
            throw ContractViolation("wrong number of blocks");
        const Index d = factors_.front().rows();
        CMatrix s = CMatrix::Identity(d, d);
        for (std::size_t k = 0; k < factors_.size(); ++k)
        {
            if (blocks[k].rows() != sizes_[k])
                throw ContractViolation("block " + std::to_string(k) + " has the wrong size");
            s.noalias() += factors_[k] * blocks[k] * factors_[k].adjoint();
        }
        return 0.5 * (s + s.adjoint());
    }

    std::vector<CMatrix> factors_;
    std::vector<Index> offsets_;
    std::vector<Index> sizes_;
};

// ---- Penalised MM over the elliptope --------------------------------------------------

struct MmOptions
{
    double tau = 2.0;
    double outer_tol = 1e-8;
    int max_outer = 100;
    double inner_tol = 1e-8;
    int max_inner = 300;
    double armijo = 1e-4;
    double min_step = 1e-14;
    // First trial step of each inner solve, and the cap on later trial steps.
    double initial_step = 1.0;
    double max_step = 1e4;
    // Barzilai-Borwein trial steps; otherwise twice the last accepted step.
    bool bb_steps = true;
    // Optional penalty growth: double tau after every outer round while some
    // block's rank residual exceeds `residual_target`, up to `tau_max`.
    bool tau_doubling = false;
    double tau_max = 128.0;
    double residual_target = 1e-3;
    // Throw on an inner solve that hits max_inner; otherwise keep its best
    // iterate and carry on.
    bool strict_inner = true;
    ElliptopeOptions projection{};
};

struct MmResult
{
    std::vector<RankOneBlock> blocks;
    // Penalised objective f(J) - tau sum_k (||J_k||_* - ||J_k||_2) before the
    // first and after every outer round.
    std::vector<double> objective_trace;
    std::vector<double> initial_residuals;
    std::vector<double> final_residuals;
    int outer_iterations = 0;
    int inner_iterations = 0;
    int inner_failures = 0;
    double final_tau = 0.0;
    // Worst feasibility seen over every accepted iterate.
    double max_diag_error = 0.0;
    double min_eigenvalue = 0.0;
};

namespace detail
{

inline double penalty(const std::vector<CMatrix> &blocks, double tau)
{
    double acc = 0.0;
    for (const CMatrix &j : blocks)
        acc += rank_residual(HermitianMatrix(j));
    return tau * acc;
}

inline double frob_inner(const CMatrix &a, const CMatrix &b) { return (a.adjoint() * b).trace().real(); }

struct InnerOutcome
{
    std::vector<CMatrix> blocks;
    int steps = 0;
    bool converged = false;
};

// Projected gradient ascent on f(J) + tau sum_k v_k^H J_k v_k, with
// Barzilai-Borwein trial steps refined by Armijo backtracking.
template <BlockObjective Objective>
InnerOutcome maximise_surrogate(const Objective &f, std::vector<CMatrix> blocks, const std::vector<double> &diag,
                                const std::vector<CVector> &v, double tau, const MmOptions &opt, MmResult &stats)
{
    auto surrogate = [&](const std::vector<CMatrix> &js) {
        double acc = f.value(js);
        for (std::size_t k = 0; k < js.size(); ++k)
            acc += tau * (v[k].adjoint() * js[k] * v[k])(0, 0).real();
        return acc;
    };
    InnerOutcome out;
    double current = surrogate(blocks);
    double last_step = opt.initial_step;
    std::vector<CMatrix> prev_blocks, prev_grad;
    for (int step = 1; step <= opt.max_inner; ++step)
    {
        out.steps = step;
        std::vector<CMatrix> grad = f.gradient(blocks);
        for (std::size_t k = 0; k < grad.size(); ++k)
            grad[k] += tau * (v[k] * v[k].adjoint());

        double first = std::min(opt.max_step, 2.0 * last_step);
        if (opt.bb_steps && !prev_blocks.empty())
        {
            // Ascent on a concave function: <s, y> <= 0 along accepted steps.
            double ss = 0.0, sy = 0.0;
            for (std::size_t k = 0; k < blocks.size(); ++k)
            {
                const CMatrix sk = blocks[k] - prev_blocks[k];
                ss += sk.squaredNorm();
                sy += frob_inner(sk, grad[k] - prev_grad[k]);
            }
            if (sy < 0.0 && ss > 0.0)
                first = std::clamp(ss / -sy, opt.min_step, opt.max_step);
        }

        bool accepted = false;
        double gain = 0.0;
        for (double t = first; t >= opt.min_step; t *= 0.5)
        {
            std::vector<CMatrix> trial(blocks.size());
            double predicted = 0.0;
            for (std::size_t k = 0; k < blocks.size(); ++k)
            {
                const CMatrix moved = blocks[k] + t * grad[k];
                trial[k] = project_elliptope(HermitianMatrix(0.5 * (moved + moved.adjoint())), diag[k],
                                             opt.projection)
                               .point.matrix();
                predicted += frob_inner(grad[k], trial[k] - blocks[k]);
            }
            const double value = surrogate(trial);
            if (value >= current + opt.armijo * predicted && value >= current)
            {
                gain = value - current;
                current = value;
                last_step = t;
                prev_blocks = std::move(blocks);
                prev_grad = std::move(grad);
                blocks = std::move(trial);
                accepted = true;
                break;
            }
        }
        if (!accepted)
        {
            out.converged = true; // no ascent direction left at this resolution
            break;
        }
        for (std::size_t k = 0; k < blocks.size(); ++k)
        {
            const double diag_err = (blocks[k].diagonal().real().array() - diag[k]).abs().maxCoeff();
            stats.max_diag_error = std::max(stats.max_diag_error, diag_err);
            stats.min_eigenvalue = std::min(stats.min_eigenvalue, min_eigenvalue(HermitianMatrix(blocks[k])));
        }
        if (gain < opt.inner_tol)
        {
            out.converged = true;
            break;
        }
    }
    out.blocks = std::move(blocks);
    return out;
}

} // namespace detail

/// Penalised MM for max f(J) s.t. J_k in the elliptope, J_k rank one.
///
/// Each outer round fixes v_k, the dominant eigenvector of J_k, and maximises
/// the concave minorant f(J) + tau sum_k v_k^H J_k v_k (the nuclear norm is
/// constant on the elliptope). The penalised objective is non-decreasing
/// across outer rounds.
template <BlockObjective Objective>
MmResult mm_elliptope_solve(const Objective &f, const std::vector<RankOneBlock> &init, const MmOptions &opt = {})
{
    if (!(opt.tau > 0.0))
        throw ContractViolation("penalty weight tau must be positive");
    if (init.size() != f.block_count())
        throw ContractViolation("initial block count does not match the objective");

    std::vector<CMatrix> blocks;
    std::vector<double> diag;
    for (const RankOneBlock &b : init)
    {
        blocks.push_back(b.matrix().matrix());
        diag.push_back(b.diag_value());
    }

    MmResult res;
    for (const RankOneBlock &b : init)
    {
        res.initial_residuals.push_back(rank_residual(b));
        res.min_eigenvalue = std::min(res.min_eigenvalue, min_eigenvalue(b.matrix()));
    }
    double tau = opt.tau;
    double objective = f.value(blocks) - detail::penalty(blocks, tau);
    res.objective_trace.push_back(objective);

    for (int outer = 1; outer <= opt.max_outer; ++outer)
    {
        std::vector<CVector> v;
        v.reserve(blocks.size());
        for (const CMatrix &j : blocks)
            v.push_back(dominant_eig(HermitianMatrix(j)).vector);

        detail::InnerOutcome inner = detail::maximise_surrogate(f, blocks, diag, v, tau, opt, res);
        res.inner_iterations += inner.steps;
        if (!inner.converged)
        {
            ++res.inner_failures;
            if (opt.strict_inner)
            {
                for (std::size_t k = 0; k < inner.blocks.size(); ++k)
                    res.blocks.emplace_back(HermitianMatrix(inner.blocks[k]), diag[k]);
                res.outer_iterations = outer;
                res.final_tau = tau;
                throw NonConvergenceWith<MmResult>("inner surrogate ascent did not converge in " +
                                                       std::to_string(opt.max_inner) + " steps",
                                                   res);
            }
        }
        blocks = std::move(inner.blocks);
        const double next = f.value(blocks) - detail::penalty(blocks, tau);
        res.objective_trace.push_back(next);
        res.outer_iterations = outer;
        const double change = std::abs(next - objective);
        objective = next;

        if (opt.tau_doubling && tau < opt.tau_max)
        {
            double worst = 0.0;
            for (const CMatrix &j : blocks)
                worst = std::max(worst, rank_residual(HermitianMatrix(j)));
            if (worst > opt.residual_target)
            {
                tau = std::min(opt.tau_max, 2.0 * tau);
                objective = f.value(blocks) - detail::penalty(blocks, tau);
                continue;
            }
        }
        if (change < opt.outer_tol)
            break;
    }
    res.final_tau = tau;
    for (std::size_t k = 0; k < blocks.size(); ++k)
    {
        res.blocks.emplace_back(HermitianMatrix(blocks[k]), diag[k]);
        res.final_residuals.push_back(rank_residual(res.blocks.back()));
    }
    return res;
}

// ---- Mapping relaxed blocks back to positions -------------------------------------

/// Maps each block to the nearest rank-one point on the grid (Frobenius
/// distance), skipping grid indices in `excluded`. Chosen indices are added
/// to `excluded`, so sequential blocks land on distinct points. Ties go to
/// the smallest position.
inline std::vector<double> map_positions(const std::vector<RankOneBlock> &blocks,
                                         const std::vector<std::vector<double>> &thetas,
                                         std::span<const double> grid, std::set<std::size_t> &excluded)
{
    if (blocks.size() != thetas.size())
        throw ContractViolation("one angle list per block required");
    std::vector<double> out;
    out.reserve(blocks.size());
    for (std::size_t b = 0; b < blocks.size(); ++b)
    {
        const CMatrix &target = blocks[b].matrix().matrix();
        std::size_t pick = grid.size();
        double best = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
        {
            if (excluded.contains(k))
                continue;
            const double dist = (j_outer(grid[k], thetas[b], blocks[b].diag_value()).matrix().matrix() - target).norm();
            if (pick == grid.size() || dist < best - 1e-12)
            {
                pick = k;
                best = dist;
            }
        }
        if (pick == grid.size())
            throw InfeasibleMapping("position grid exhausted after " + std::to_string(b) + " of " +
                                    std::to_string(blocks.size()) + " antennas");
        excluded.insert(pick);
        out.push_back(grid[pick]);
    }
    return out;
}

} // namespace fluidcap
