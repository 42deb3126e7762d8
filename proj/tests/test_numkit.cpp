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

TEST_CASE("logdet of simple matrices", "[numkit]")
{
    CHECK(logdet_hpd(HermitianMatrix::identity(3)) == 0.0);
    CHECK(logdet_hpd(HermitianMatrix::diagonal(RVector::Constant(2, 2.0))) == Approx(2.0).margin(1e-15));
}

TEST_CASE("logdet matches the eigenvalue sum", "[numkit]")
{
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t)
    {
        const CMatrix h = random_hpd(rng, 6);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
        const double ref = es.eigenvalues().array().log2().sum();
        CHECK(std::abs(logdet_hpd(HermitianMatrix(h)) - ref) <= 1e-10);
    }
}

TEST_CASE("logdet rejects bad input", "[numkit]")
{
    CMatrix a(2, 2);
    a << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(HermitianMatrix(a), ContractViolation);
    CMatrix indefinite(2, 2);
    indefinite << 1.0, 0.0, 0.0, -1.0;
    CHECK_THROWS_AS(logdet_hpd(HermitianMatrix(indefinite)), DomainError);
    try
    {
        logdet_hpd(HermitianMatrix(indefinite));
    }
    catch (const DomainError &e)
    {
        CHECK(std::string(e.what()).find("pivot") != std::string::npos);
    }
}

TEST_CASE("logdet is additive over commuting products", "[numkit]")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> pos(0.1, 5.0);
    for (int t = 0; t < 20; ++t)
    {
        RVector a(4), b(4);
        for (int i = 0; i < 4; ++i)
        {
            a(i) = pos(rng);
            b(i) = pos(rng);
        }
        const double lhs = logdet_hpd(HermitianMatrix::diagonal(a.cwiseProduct(b)));
        const double rhs = logdet_hpd(HermitianMatrix::diagonal(a)) + logdet_hpd(HermitianMatrix::diagonal(b));
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
}

TEST_CASE("Sylvester determinant identity", "[numkit]")
{
    std::mt19937_64 rng(5);
    for (int t = 0; t < 30; ++t)
    {
        const CMatrix o1 = random_matrix(rng, 5, 3);
        const CMatrix q = random_psd_with_trace(rng, 3, 4.0);
        // |O1 Q O1^H + I| = |Q O1^H O1 + I|, written with Hermitian arguments.
        const CMatrix lhs = o1 * q * o1.adjoint() + CMatrix::Identity(5, 5);
        const CMatrix root = psd_sqrt(HermitianMatrix(q));
        const CMatrix rhs = root * o1.adjoint() * o1 * root + CMatrix::Identity(3, 3);
        CHECK(std::abs(logdet_hpd(HermitianMatrix(0.5 * (lhs + lhs.adjoint()))) -
                       logdet_hpd(HermitianMatrix(0.5 * (rhs + rhs.adjoint())))) <= 1e-9);
    }
}

TEST_CASE("trace of a PSD product is bounded by the trace product", "[numkit]")
{
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t)
    {
        const CMatrix a = random_psd_with_trace(rng, 4, 1.0 + t);
        const CMatrix b = random_psd_with_trace(rng, 4, 2.0);
        CHECK((a * b).trace().real() <= a.trace().real() * b.trace().real() + 1e-12);
    }
}

TEST_CASE("dominant eigenpair", "[numkit]")
{
    SECTION("diagonal")
    {
        RVector d(2);
        d << 3.0, 1.0;
        const EigenPair p = dominant_eig(HermitianMatrix::diagonal(d));
        CHECK(p.value == Approx(3.0));
        CHECK(std::abs(p.vector(0)) == Approx(1.0));
        CHECK(std::abs(p.vector(1)) <= 1e-15);
    }
    SECTION("rank one")
    {
        std::mt19937_64 rng(9);
        CVector b = random_matrix(rng, 4, 1).col(0);
        b.normalize();
        const EigenPair p = dominant_eig(HermitianMatrix(b * b.adjoint()));
        CHECK(p.value == Approx(1.0));
        CHECK(std::abs(b.dot(p.vector)) == Approx(1.0).margin(1e-12));
    }
    SECTION("random residual")
    {
        std::mt19937_64 rng(10);
        for (int t = 0; t < 50; ++t)
        {
            const CMatrix h = random_hermitian(rng, 6);
            const EigenPair p = dominant_eig(HermitianMatrix(h));
            CHECK((h * p.vector - p.value * p.vector).norm() <= 1e-9 * h.norm());
            CHECK(p.vector.norm() == Approx(1.0).margin(1e-12));
            Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
            CHECK(p.value == Approx(es.eigenvalues().maxCoeff()).margin(1e-12));
        }
    }
    SECTION("ties go to the lowest basis index, deterministically")
    {
        const EigenPair a = dominant_eig(HermitianMatrix::identity(3));
        const EigenPair b = dominant_eig(HermitianMatrix::identity(3));
        CHECK(a.vector == b.vector);
        CHECK(a.value == 1.0);
    }
}

namespace
{
void check_elliptope_point(const CMatrix &x, double c)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()(0) >= -1e-9);
    CHECK((x.diagonal().real().array() - c).abs().maxCoeff() <= 1e-9);
}
} // namespace

TEST_CASE("elliptope projection fixed points", "[numkit]")
{
    std::mt19937_64 rng(21);
    for (int t = 0; t < 20; ++t)
    {
        const double c = t % 2 ? 1.0 : 0.25;
        const CMatrix x = random_elliptope_point(rng, 1 + t % 5, c);
        for (ElliptopeMethod m : {ElliptopeMethod::newton, ElliptopeMethod::dykstra})
        {
            ElliptopeOptions opt;
            opt.method = m;
            const HermitianMatrix p = elliptope_project(HermitianMatrix(x), c, opt);
            CHECK((p.matrix() - x).norm() <= 1e-12 * std::max(1.0, x.norm()) * 10);
        }
    }
    const HermitianMatrix two = HermitianMatrix::diagonal(RVector::Constant(2, 2.0));
    CHECK((elliptope_project(two, 1.0).matrix() - CMatrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("elliptope projection of 2x2 matrices has a closed form", "[numkit]")
{
    // {[[c, z], [conj z, c]] : |z| <= c}: project by clipping the off-diagonal.
    std::mt19937_64 rng(22);
    for (int t = 0; t < 200; ++t)
    {
        const double c = t % 3 == 0 ? 1.0 : 0.5;
        const CMatrix x = 2.0 * random_hermitian(rng, 2);
        cdouble z = x(0, 1);
        if (std::abs(z) > c)
            z *= c / std::abs(z);
        for (ElliptopeMethod m : {ElliptopeMethod::newton, ElliptopeMethod::dykstra})
        {
            ElliptopeOptions opt;
            opt.method = m;
            const HermitianMatrix p = elliptope_project(HermitianMatrix(x), c, opt);
            CHECK(std::abs(p(0, 1) - z) <= 1e-9);
            check_elliptope_point(p.matrix(), c);
        }
    }
}

TEST_CASE("elliptope projection beats random feasible points", "[numkit]")
{
    std::mt19937_64 rng(23);
    for (int t = 0; t < 10; ++t)
    {
        const Index n = 2 + t % 4;
        const CMatrix x = 1.5 * random_hermitian(rng, n);
        const HermitianMatrix p = elliptope_project(HermitianMatrix(x), 1.0);
        check_elliptope_point(p.matrix(), 1.0);
        const double d = (p.matrix() - x).norm();
        double best_random = 1e300;
        for (int k = 0; k < 1000; ++k)
            best_random = std::min(best_random, (random_elliptope_point(rng, n, 1.0) - x).norm());
        CHECK(d <= best_random + 1e-12);
    }
}

TEST_CASE("Newton and Dykstra elliptope projections agree", "[numkit]")
{
    std::mt19937_64 rng(24);
    for (int t = 0; t < 300; ++t)
    {
        const Index n = 1 + t % 7;
        const double c = t % 3 == 0 ? 1.0 : 1.0 / double(1 + t % 4);
        CMatrix x = 2.0 * random_hermitian(rng, n);
        if (t % 4 == 1)
        {
            // Near-rank-one inputs, as produced inside the relaxation.
            const CVector v = random_matrix(rng, n, 1).col(0);
            x = (3.0 * v * v.adjoint() + 1e-3 * x).eval();
            x = (0.5 * (x + x.adjoint())).eval();
        }
        ElliptopeOptions dyk;
        dyk.method = ElliptopeMethod::dykstra;
        dyk.tol = 1e-13;
        dyk.max_sweeps = 200000;
        const ElliptopeProjection a = project_elliptope(HermitianMatrix(x), c);
        const ElliptopeProjection b = project_elliptope(HermitianMatrix(x), c, dyk);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK((a.point.matrix() - b.point.matrix()).norm() <= 1e-8);
        check_elliptope_point(a.point.matrix(), c);
    }
}

TEST_CASE("elliptope projection sweep cap raises nonconvergence with a feasible point", "[numkit]")
{
    std::mt19937_64 rng(25);
    const CMatrix x = 3.0 * random_hermitian(rng, 5);
    ElliptopeOptions opt;
    opt.method = ElliptopeMethod::dykstra;
    opt.max_sweeps = 1;
    try
    {
        elliptope_project(HermitianMatrix(x), 1.0, opt);
        FAIL("expected nonconvergence");
    }
    catch (const NonConvergenceWith<HermitianMatrix> &e)
    {
        check_elliptope_point(e.best().matrix(), 1.0);
    }
    CHECK_THROWS_AS(elliptope_project(HermitianMatrix(x), 0.0), ContractViolation);
}

TEST_CASE("nuclear norm on the elliptope is constant", "[numkit]")
{
    std::mt19937_64 rng(26);
    for (int t = 0; t < 50; ++t)
    {
        const Index n = 1 + t % 6;
        const double c = 0.25 + 0.25 * (t % 4);
        const CMatrix x = random_elliptope_point(rng, n, c);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(x, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().cwiseAbs().sum() == Approx(c * double(n)).margin(1e-10));
    }
}
