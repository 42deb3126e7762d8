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

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

using namespace fluidcap;
using namespace testing_support;
using Catch::Approx;

namespace
{
std::vector<double> random_angles(std::mt19937_64 &rng, int n)
{
    std::uniform_real_distribution<double> ang(0.0, kPi);
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(ang(rng));
    return out;
}

double ref_logdet_objective(const std::vector<CMatrix> &b, const std::vector<CMatrix> &j)
{
    CMatrix acc = CMatrix::Zero(b.front().rows(), b.front().rows());
    for (std::size_t k = 0; k < b.size(); ++k)
        acc += b[k] * j[k] * b[k].adjoint();
    return logdet_eye_plus(acc);
}
} // namespace

TEST_CASE("rank-one blocks from positions", "[rankone]")
{
    std::mt19937_64 rng(31);
    for (int t = 0; t < 30; ++t)
    {
        const auto th = random_angles(rng, 1 + t % 5);
        const double c = t % 2 ? 1.0 : 0.25;
        const RankOneBlock b = j_outer(0.1 * t, th, c);
        CHECK(b.diag_value() == c);
        CHECK(rank_residual(b) <= 1e-12);
        CHECK(dominant_eig(b.matrix()).value == Approx(c * double(th.size())));
        // tr(Psi J) / c is the quadratic form a^T Psi a^*.
        const CMatrix psi = random_hpd(rng, Index(th.size()));
        const CVector a = transmit_phases(th, 0.1 * t);
        const cdouble quad = (a.transpose() * psi * a.conjugate())(0, 0);
        CHECK((psi * b.matrix().matrix()).trace().real() / c == Approx(quad.real()));
    }
    CHECK(rank_residual(HermitianMatrix::identity(3)) == Approx(2.0));
    CHECK_THROWS_AS(RankOneBlock(HermitianMatrix::identity(2), 0.0), ContractViolation);
    CHECK_THROWS_AS(RankOneBlock(HermitianMatrix::identity(2), 0.5), ContractViolation);
    CMatrix neg(2, 2);
    neg << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(RankOneBlock(HermitianMatrix(neg), 1.0), ContractViolation);
}

TEST_CASE("log-det objective value and gradient", "[rankone]")
{
    std::mt19937_64 rng(32);
    for (int t = 0; t < 20; ++t)
    {
        // Alternate between wide (direct) and tall (Gram-reduced) factors.
        const Index d = t % 2 ? 2 : 9;
        std::vector<CMatrix> b;
        std::vector<CMatrix> j;
        for (int k = 0; k < 1 + t % 3; ++k)
        {
            const Index n = 1 + (t + k) % 3;
            b.push_back(random_matrix(rng, d, n));
            j.push_back(random_elliptope_point(rng, n, 1.0));
        }
        const LogDetObjective f(b);
        CHECK(f.block_count() == b.size());
        CHECK(f.value(j) == Approx(ref_logdet_objective(b, j)).epsilon(1e-11));

        const auto g = f.gradient(j);
        const double h = 1e-6;
        for (std::size_t k = 0; k < j.size(); ++k)
        {
            const CMatrix dir = random_hermitian(rng, j[k].rows());
            auto jp = j, jm = j;
            jp[k] += h * dir;
            jm[k] -= h * dir;
            const double fd = (ref_logdet_objective(b, jp) - ref_logdet_objective(b, jm)) / (2 * h);
            CHECK((g[k].adjoint() * dir).trace().real() == Approx(fd).epsilon(1e-6).margin(1e-8));
        }
    }
    CHECK_THROWS_AS(LogDetObjective(std::vector<CMatrix>{}), ContractViolation);
    std::mt19937_64 r2(1);
    const LogDetObjective f({random_matrix(r2, 3, 2)});
    CHECK_THROWS_AS(f.value({CMatrix::Identity(3, 3)}), ContractViolation);
}

TEST_CASE("penalised MM keeps blocks feasible and the objective non-decreasing", "[rankone]")
{
    std::mt19937_64 rng(33);
    for (int t = 0; t < 15; ++t)
    {
        const Index n = 2 + t % 4;
        std::vector<CMatrix> b{random_matrix(rng, 6, n), random_matrix(rng, 6, n)};
        const LogDetObjective f(b);
        std::vector<RankOneBlock> init;
        for (int k = 0; k < 2; ++k)
            init.push_back(j_outer(0.7 * (t + k), random_angles(rng, int(n)), 1.0 / double(n)));
        MmOptions opt;
        opt.tau = 1.0 + t % 3;
        const MmResult r = mm_elliptope_solve(f, init, opt);
        REQUIRE(r.objective_trace.size() >= 2);
        for (std::size_t k = 1; k < r.objective_trace.size(); ++k)
            CHECK(r.objective_trace[k] >= r.objective_trace[k - 1] - 1e-9);
        CHECK(r.max_diag_error <= 1e-8);
        CHECK(r.min_eigenvalue >= -1e-8);
        for (const RankOneBlock &blk : r.blocks)
            CHECK(blk.diag_value() == Approx(1.0 / double(n)));
        CHECK(r.final_residuals.size() == 2);
        CHECK(r.final_tau == opt.tau);
    }
}

TEST_CASE("penalised MM from a full-rank start reduces the rank residual", "[rankone]")
{
    std::mt19937_64 rng(34);
    const std::vector<CMatrix> b{random_matrix(rng, 4, 3)};
    const LogDetObjective f(b);
    const std::vector<RankOneBlock> init{RankOneBlock(HermitianMatrix::identity(3), 1.0)};
    MmOptions opt;
    opt.tau = 5.0;
    opt.tau_doubling = true;
    const MmResult r = mm_elliptope_solve(f, init, opt);
    CHECK(r.initial_residuals[0] == Approx(2.0));
    CHECK(r.final_residuals[0] < 1e-3);
    CHECK(r.final_tau >= opt.tau);
}

TEST_CASE("penalised MM from random relaxed points", "[rankone]")
{
    std::mt19937_64 rng(37);
    for (int t = 0; t < 10; ++t)
    {
        std::vector<CMatrix> b{random_matrix(rng, 5, 3), random_matrix(rng, 5, 3)};
        const LogDetObjective f(b);
        const std::vector<RankOneBlock> init{RankOneBlock(HermitianMatrix(random_elliptope_point(rng, 3, 1.0)), 1.0),
                                             RankOneBlock(HermitianMatrix(random_elliptope_point(rng, 3, 1.0)), 1.0)};
        // The penalised objective is monotone only while tau is fixed.
        const MmResult fixed = mm_elliptope_solve(f, init, MmOptions{});
        for (std::size_t k = 1; k < fixed.objective_trace.size(); ++k)
            CHECK(fixed.objective_trace[k] >= fixed.objective_trace[k - 1] - 1e-9);
        // A fixed penalty may trade residual for objective; a growing one may not.
        MmOptions opt;
        opt.tau_doubling = true;
        const MmResult r = mm_elliptope_solve(f, init, opt);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(r.final_residuals[k] <= r.initial_residuals[k] + 1e-9);
    }
}

TEST_CASE("penalised MM leaves scalar blocks alone", "[rankone]")
{
    std::mt19937_64 rng(38);
    const LogDetObjective f({random_matrix(rng, 4, 1), random_matrix(rng, 4, 1)});
    const std::vector<RankOneBlock> init{j_outer(0.0, std::vector<double>{1.0}, 1.0),
                                         j_outer(0.0, std::vector<double>{2.0}, 1.0)};
    const MmResult r = mm_elliptope_solve(f, init, MmOptions{});
    for (std::size_t k = 0; k < 2; ++k)
        CHECK(std::abs(r.blocks[k].matrix()(0, 0).real() - 1.0) <= 1e-12);
    CHECK(std::abs(r.objective_trace.back() - r.objective_trace.front()) <= 1e-12);
}

TEST_CASE("penalised MM argument checks and inner cap", "[rankone]")
{
    std::mt19937_64 rng(35);
    const LogDetObjective f({random_matrix(rng, 3, 2)});
    const std::vector<RankOneBlock> init{RankOneBlock(HermitianMatrix::identity(2), 1.0)};
    MmOptions bad;
    bad.tau = 0.0;
    CHECK_THROWS_AS(mm_elliptope_solve(f, init, bad), ContractViolation);
    CHECK_THROWS_AS(mm_elliptope_solve(f, std::vector<RankOneBlock>{}, MmOptions{}), ContractViolation);

    MmOptions capped;
    capped.max_inner = 1;
    capped.inner_tol = 0.0;
    try
    {
        mm_elliptope_solve(f, init, capped);
        FAIL("expected the inner cap to trigger");
    }
    catch (const NonConvergenceWith<MmResult> &e)
    {
        CHECK(e.best().blocks.size() == 1);
    }
    capped.strict_inner = false;
    capped.max_outer = 3;
    const MmResult loose = mm_elliptope_solve(f, init, capped);
    CHECK(loose.inner_failures >= 1);
    CHECK(loose.blocks.size() == 1);
}

TEST_CASE("mapping blocks to grid positions", "[rankone]")
{
    std::mt19937_64 rng(36);
    const std::vector<double> grid = quantized_grid(10.0, 100);
    for (int t = 0; t < 20; ++t)
    {
        const auto th = random_angles(rng, 4);
        const std::size_t k = std::size_t(t * 5);
        std::set<std::size_t> excluded;
        const auto w = map_positions({j_outer(grid[k], th, 0.5)}, {th}, grid, excluded);
        // A grid point's own block maps back to it unless another point gives
        // the same block (aliasing), in which case the smaller one wins.
        const double dist =
            (j_outer(w[0], th, 0.5).matrix().matrix() - j_outer(grid[k], th, 0.5).matrix().matrix()).norm();
        CHECK(dist <= 1e-9);
        CHECK(w[0] <= grid[k]);
        CHECK(excluded.size() == 1);
    }

    // Identical blocks land on distinct points.
    const auto th = random_angles(rng, 3);
    const RankOneBlock blk = j_outer(grid[40], th, 1.0);
    std::set<std::size_t> excluded;
    const auto w = map_positions({blk, blk, blk}, {th, th, th}, grid, excluded);
    CHECK(w[0] != w[1]);
    CHECK(w[1] != w[2]);
    CHECK(w[0] != w[2]);

    const std::vector<double> tiny{0.0, 1.0};
    std::set<std::size_t> ex2;
    CHECK_THROWS_AS(map_positions({blk, blk, blk}, {th, th, th}, tiny, ex2), InfeasibleMapping);
    std::set<std::size_t> ex3;
    CHECK_THROWS_AS(map_positions({blk}, {th, th}, tiny, ex3), ContractViolation);
}
