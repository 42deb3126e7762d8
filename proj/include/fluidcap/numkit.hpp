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

// Complex Hermitian kernel: log-determinants, eigendecomposition, dominant
// eigenpairs and the Euclidean projection onto the fixed-diagonal PSD set
// (the elliptope). Everything here is a pure function of its arguments.

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "fluidcap/common.hpp"

namespace fluidcap
{

// Square complex matrix with entry(i,j) == conj(entry(j,i)) exactly as stored.
class HermitianMatrix
{
public:
    // Relative tolerance (against the largest entry modulus) for accepting an input as Hermitian.
    static constexpr double kSymmetryTol = 1e-10;

    explicit HermitianMatrix(CMatrix m)
        : m_(std::move(m))
    {
        if (m_.rows() != m_.cols() || m_.rows() < 1)
            throw ContractViolation("Hermitian matrix must be square with dim >= 1, got " +
                                    std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
        if (!m_.allFinite())
            throw ContractViolation("Hermitian matrix has non-finite entries");
        const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
        const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
        if (asym > kSymmetryTol * scale)
            throw ContractViolation("matrix is not Hermitian (asymmetry " + std::to_string(asym) + ")");
        // Mirror the upper triangle so the symmetry is exact.
        for (Index j = 0; j < m_.cols(); ++j)
        {
            m_(j, j) = cdouble(m_(j, j).real(), 0.0);
            for (Index i = 0; i < j; ++i)
                m_(j, i) = std::conj(m_(i, j));
        }
    }

    static HermitianMatrix identity(Index n) { return HermitianMatrix(CMatrix::Identity(n, n)); }
    static HermitianMatrix zero(Index n) { return HermitianMatrix(CMatrix::Zero(n, n)); }
    static HermitianMatrix diagonal(const RVector &d) { return HermitianMatrix(CMatrix(d.cast<cdouble>().asDiagonal())); }

    Index dim() const noexcept { return m_.rows(); }
    const CMatrix &matrix() const noexcept { return m_; }
    cdouble operator()(Index i, Index j) const { return m_(i, j); }
    double trace() const { return m_.trace().real(); }

    friend bool operator==(const HermitianMatrix &a, const HermitianMatrix &b)
    {
        return a.dim() == b.dim() && a.m_ == b.m_;
    }

private:
    CMatrix m_;
};

// Eigenvalues in ascending order with matching orthonormal eigenvectors (columns).
struct Spectrum
{
    RVector values;
    CMatrix vectors;
};

inline Spectrum eigh(const HermitianMatrix &h)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix());
    if (es.info() != Eigen::Success)
        throw DomainError("Hermitian eigensolver failed");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double min_eigenvalue(const HermitianMatrix &h)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// log2 det(H) for Hermitian positive definite H.
///
/// Uses a Cholesky factorization; when it breaks down the offending pivot is
/// located with an unblocked elimination and reported in the DomainError.
inline double logdet_hpd(const HermitianMatrix &h)
{
    const CMatrix &a = h.matrix();
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() == Eigen::Success)
    {
        const auto d = llt.matrixLLT().diagonal().real().array();
        if ((d > 0.0).all())
            return 2.0 * d.log().sum() / kLn2;
    }
    const Index n = a.rows();
    CMatrix l = CMatrix::Zero(n, n);
    for (Index k = 0; k < n; ++k)
    {
        double pivot = a(k, k).real();
        for (Index j = 0; j < k; ++j)
            pivot -= std::norm(l(k, j));
        if (!(pivot > 0.0))
            throw DomainError("matrix is not positive definite: Cholesky pivot " + std::to_string(k) +
                              " = " + std::to_string(pivot));
        l(k, k) = std::sqrt(pivot);
        for (Index i = k + 1; i < n; ++i)
        {
            cdouble s = a(i, k);
            for (Index j = 0; j < k; ++j)
                s -= l(i, j) * std::conj(l(k, j));
            l(i, k) = s / l(k, k).real();
        }
    }
    double acc = 0.0;
    for (Index k = 0; k < n; ++k)
        acc += 2.0 * std::log(l(k, k).real());
    return acc / kLn2;
}

struct EigenPair
{
    double value;
    CVector vector;
};

/// Largest eigenvalue and a unit eigenvector.
///
/// Ties within 1e-11 (relative) go to the lowest column index of the
/// eigenbasis. The returned vector is phase-normalised so that its first
/// largest-modulus entry is real and positive, which makes the output
/// deterministic for identical input.
inline EigenPair dominant_eig(const HermitianMatrix &h)
{
    const Spectrum s = eigh(h);
    const Index n = s.values.size();
    const double top = s.values(n - 1);
    const double tie = 1e-11 * std::max(1.0, std::abs(top));
    Index pick = n - 1;
    for (Index i = 0; i < n; ++i)
        if (s.values(i) >= top - tie)
        {
            pick = i;
            break;
        }
    CVector v = s.vectors.col(pick);
    v.normalize();
    Index lead = 0;
    double best = -1.0;
    for (Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > best + 1e-12)
        {
            best = std::abs(v(i));
            lead = i;
        }
    if (best > 0.0)
        v *= std::conj(v(lead)) / std::abs(v(lead));
    return {top, v};
}

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline CMatrix psd_part(const CMatrix &x)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x);
    const RVector d = es.eigenvalues().cwiseMax(0.0);
    CMatrix out = es.eigenvectors() * d.cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (out + out.adjoint());
}

// Principal square root of a PSD matrix (negative eigenvalues clipped).
inline CMatrix psd_sqrt(const HermitianMatrix &h)
{
    const Spectrum s = eigh(h);
    const RVector d = s.values.cwiseMax(0.0).cwiseSqrt();
    CMatrix out = s.vectors * d.cast<cdouble>().asDiagonal() * s.vectors.adjoint();
    return 0.5 * (out + out.adjoint());
}

enum class ElliptopeMethod
{
    newton,  // semismooth Newton on the diagonal dual, Dykstra as fallback
    dykstra, // alternating projections only
};

struct ElliptopeOptions
{
    int max_sweeps = 500;
    double tol = 1e-10; // successive-iterate Frobenius change
    ElliptopeMethod method = ElliptopeMethod::newton;
};

struct ElliptopeProjection
{
    HermitianMatrix point;
    int sweeps = 0;
    bool converged = false;
};

namespace detail
{

// Small Hermitian matrices live on the stack during alternating projections.
using SmallCMatrix = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;
using SmallRVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 16, 1>;

// Cyclic complex Jacobi eigensolver that starts from the basis of its
// previous call. Alternating projections feed it a sequence of slowly
// changing matrices, which are nearly diagonal in the last basis, so one or
// two sweeps usually suffice.
template <class Mat, class Vec>
class WarmJacobi
{
public:
    void compute(const Mat &h)
    {
        const Index n = h.rows();
        if (basis_.rows() != n || ++calls_ % 32 == 0)
            reset_basis(n);
        Mat b = basis_.adjoint() * h * basis_;
        const double tol = 1e-15 * h.norm();
        bool done = false;
        for (int sweep = 0; sweep < 30; ++sweep)
        {
            double off = 0.0;
            for (Index q = 1; q < n; ++q)
                for (Index p = 0; p < q; ++p)
                    off += std::norm(b(p, q));
            if (std::sqrt(2.0 * off) <= tol)
            {
                done = true;
                break;
            }
            for (Index q = 1; q < n; ++q)
                for (Index p = 0; p < q; ++p)
                    rotate(b, p, q);
        }
        if (!done)
        {
            // Fall back to the dense solver and continue from its basis.
            Eigen::SelfAdjointEigenSolver<Mat> es(h);
            basis_ = es.eigenvectors();
            values_ = es.eigenvalues();
            return;
        }
        values_ = b.diagonal().real();
    }

    const Vec &values() const noexcept { return values_; }
    const Mat &vectors() const noexcept { return basis_; }

private:
    void reset_basis(Index n)
    {
        if (basis_.rows() != n)
            basis_ = Mat::Identity(n, n);
        else
        {
            Eigen::HouseholderQR<Mat> qr(basis_);
            basis_ = qr.householderQ() * Mat::Identity(n, n);
        }
    }

    // Annihilates b(p, q) with a unitary 2 x 2 rotation G: b <- G^H b G.
    void rotate(Mat &b, Index p, Index q)
    {
        const cdouble bpq = b(p, q);
        const double beta = std::abs(bpq);
        if (beta == 0.0)
            return;
        const cdouble phase = std::conj(bpq) / beta;
        const double a = b(p, p).real();
        const double d = b(q, q).real();
        // Real rotation for [[a, beta], [beta, d]], smaller angle.
        const double zeta = (d - a) / (2.0 * beta);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        // G = [[c, s], [-s phase, c phase]]
        const cdouble g10 = -s * phase, g11 = c * phase;
        const Index n = b.rows();
        for (Index k = 0; k < n; ++k)
        {
            const cdouble x = b(k, p), y = b(k, q);
            b(k, p) = c * x + y * g10;
            b(k, q) = s * x + y * g11;
        }
        for (Index k = 0; k < n; ++k)
        {
            const cdouble x = b(p, k), y = b(q, k);
            b(p, k) = c * x + std::conj(g10) * y;
            b(q, k) = s * x + std::conj(g11) * y;
        }
        b(p, q) = b(q, p) = 0.0;
        b(p, p) = b(p, p).real();
        b(q, q) = b(q, q).real();
        for (Index k = 0; k < n; ++k)
        {
            const cdouble x = basis_(k, p), y = basis_(k, q);
            basis_(k, p) = c * x + y * g10;
            basis_(k, q) = s * x + y * g11;
        }
    }

    Mat basis_;
    Vec values_;
    long calls_ = 0;
};

template <class Mat, class Vec>
void dykstra_sweeps(const CMatrix &x, double diag_value, const ElliptopeOptions &opt, CMatrix &psd_out, int &sweeps,
                    bool &converged)
{
    const Index n = x.rows();
    Mat y = x;
    Mat correction = Mat::Zero(n, n);
    Mat psd = y;
    WarmJacobi<Mat, Vec> eig;
    sweeps = 0;
    converged = false;
    while (sweeps < opt.max_sweeps)
    {
        ++sweeps;
        const Mat shifted = y + correction;
        eig.compute(shifted);
        // Clip the negative part as a low-rank correction.
        psd = shifted;
        for (Index k = 0; k < n; ++k)
        {
            const double lambda = eig.values()(k);
            if (lambda < 0.0)
                psd.noalias() -= lambda * (eig.vectors().col(k) * eig.vectors().col(k).adjoint());
        }
        for (Index j = 0; j < n; ++j)
        {
            psd(j, j) = psd(j, j).real();
            for (Index i = 0; i < j; ++i)
            {
                const cdouble avg = 0.5 * (psd(i, j) + std::conj(psd(j, i)));
                psd(i, j) = avg;
                psd(j, i) = std::conj(avg);
            }
        }
        correction = shifted - psd;
        double change = 0.0;
        double gap = 0.0;
        for (Index j = 0; j < n; ++j)
            for (Index i = 0; i < n; ++i)
            {
                const cdouble next = i == j ? cdouble(diag_value, 0.0) : psd(i, j);
                change += std::norm(next - y(i, j));
                y(i, j) = next;
            }
        for (Index j = 0; j < n; ++j)
            gap += std::norm(psd(j, j) - diag_value);
        // The iterate can sit still while the correction builds up (e.g. a
        // zero PSD part), so the PSD iterate must also meet the diagonal.
        if (std::sqrt(change) < opt.tol && std::sqrt(gap) < opt.tol)
        {
            converged = true;
            break;
        }
    }
    psd_out = psd;
}

// Turns a PSD matrix with positive diagonal into an exact elliptope point by
// congruence with D^{-1/2}, which keeps it PSD and pins the diagonal.
inline HermitianMatrix rescale_to_elliptope(const CMatrix &psd, double diag_value)
{
    const Index n = psd.rows();
    const RVector d = psd.diagonal().real();
    if ((d.array() <= 1e-300).any())
        return HermitianMatrix(CMatrix::Identity(n, n) * diag_value);
    const RVector s = d.cwiseSqrt().cwiseInverse();
    CMatrix out = diag_value * (s.cast<cdouble>().asDiagonal() * psd * s.cast<cdouble>().asDiagonal());
    for (Index i = 0; i < n; ++i)
        out(i, i) = diag_value;
    return HermitianMatrix(0.5 * (out + out.adjoint()));
}

// Projection via the dual over diagonal shifts y:
//   min_y 0.5 ||(X + Diag y)_+||^2 - c sum(y),
// whose gradient is diag((X + Diag y)_+) - c. The minimiser's PSD part is the
// projection. Newton steps use the generalized Jacobian of the PSD part.
template <class Mat, class Vec>
bool newton_dual(const CMatrix &x, double diag_value, CMatrix &psd_out, int &iterations)
{
    const Index n = x.rows();
    const Mat xs = x;
    const double scale = std::max(1.0, xs.norm());
    const double gtol = 1e-13 * scale;
    Vec y = Vec::Constant(n, diag_value) - xs.diagonal().real();

    Eigen::SelfAdjointEigenSolver<Mat> es;
    auto evaluate = [&](const Vec &shift, Mat &psd, Vec &grad) {
        Mat z = xs;
        z.diagonal() += shift.template cast<cdouble>();
        es.compute(z);
        const Vec plus = es.eigenvalues().cwiseMax(0.0);
        psd = es.eigenvectors() * plus.template cast<cdouble>().asDiagonal() * es.eigenvectors().adjoint();
        grad = psd.diagonal().real() - Vec::Constant(n, diag_value);
        return 0.5 * plus.squaredNorm() - diag_value * shift.sum();
    };

    Mat psd;
    Vec grad;
    double theta = evaluate(y, psd, grad);
    for (iterations = 0; iterations < 50; ++iterations)
    {
        if (grad.template lpNorm<Eigen::Infinity>() <= gtol)
        {
            psd_out = psd;
            return true;
        }
        const Vec lambda = es.eigenvalues();
        const Mat v = es.eigenvectors();
        using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, Mat::MaxRowsAtCompileTime,
                                   Mat::MaxColsAtCompileTime>;
        RMat omega(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b)
            {
                const double la = lambda(a), lb = lambda(b);
                if (la > 0.0 && lb > 0.0)
                    omega(a, b) = 1.0;
                else if (la <= 0.0 && lb <= 0.0)
                    omega(a, b) = 0.0;
                else
                    omega(a, b) = (std::max(la, 0.0) - std::max(lb, 0.0)) / (la - lb);
            }
        // jac(i, j) = sum_ab omega_ab h_a conj(h_b), h_a = V(i, a) conj(V(j, a)).
        RMat jac(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j <= i; ++j)
            {
                double acc = 0.0;
                for (Index a = 0; a < n; ++a)
                {
                    const cdouble ha = v(i, a) * std::conj(v(j, a));
                    for (Index b = 0; b < n; ++b)
                        acc += omega(a, b) * std::real(ha * std::conj(v(i, b) * std::conj(v(j, b))));
                }
                jac(i, j) = jac(j, i) = acc;
            }
        jac.diagonal().array() += 1e-12 * scale;
        const Vec step = -jac.ldlt().solve(grad);
        if (!step.allFinite())
            return false;
        const double slope = grad.dot(step);
        if (!(slope < 0.0))
            return false;
        double t = 1.0;
        bool moved = false;
        for (int k = 0; k < 40; ++k, t *= 0.5)
        {
            const Vec trial = y + t * step;
            Mat trial_psd;
            Vec trial_grad;
            const double value = evaluate(trial, trial_psd, trial_grad);
            // Near the solution the dual value stops resolving progress, so
            // a halved gradient also counts.
            if (value <= theta + 1e-4 * t * slope ||
                trial_grad.template lpNorm<Eigen::Infinity>() <= 0.5 * grad.template lpNorm<Eigen::Infinity>())
            {
                y = trial;
                theta = value;
                psd = trial_psd;
                grad = trial_grad;
                moved = true;
                break;
            }
        }
        if (!moved)
            break;
        // Keep es in sync with the accepted point for the next Jacobian.
        Mat z = xs;
        z.diagonal() += y.template cast<cdouble>();
        es.compute(z);
    }
    // Stalled at roundoff level: good enough for the final rescaling.
    if (grad.template lpNorm<Eigen::Infinity>() <= 1e-10 * scale)
    {
        psd_out = psd;
        return true;
    }
    return false;
}

} // namespace detail

/// Euclidean projection onto {M >= 0, diag(M) = c}.
///
/// The default method solves the diagonal dual by semismooth Newton. When
/// that stalls, or when `method` asks for it, Dykstra alternating projection
/// runs instead: PSD cone (with the Dykstra correction) and the affine
/// fixed-diagonal set until successive iterates move less than `tol`. The
/// final PSD iterate is rescaled onto the set, so the returned point is
/// feasible even when the sweep cap is hit (`converged == false`). `sweeps`
/// counts Newton iterations or Dykstra sweeps, whichever produced the point.
inline ElliptopeProjection project_elliptope(const HermitianMatrix &x, double diag_value,
                                             const ElliptopeOptions &opt = {})
{
    if (!(diag_value > 0.0))
        throw ContractViolation("elliptope diagonal value must be positive");
    CMatrix psd;
    int sweeps = 0;
    bool converged = false;
    if (opt.method == ElliptopeMethod::newton)
    {
        const bool ok = x.dim() <= 16
                            ? detail::newton_dual<detail::SmallCMatrix, detail::SmallRVector>(x.matrix(), diag_value,
                                                                                             psd, sweeps)
                            : detail::newton_dual<CMatrix, RVector>(x.matrix(), diag_value, psd, sweeps);
        if (ok)
            return {detail::rescale_to_elliptope(psd, diag_value), sweeps, true};
    }
    if (x.dim() <= 16)
        detail::dykstra_sweeps<detail::SmallCMatrix, detail::SmallRVector>(x.matrix(), diag_value, opt, psd, sweeps,
                                                                           converged);
    else
        detail::dykstra_sweeps<CMatrix, RVector>(x.matrix(), diag_value, opt, psd, sweeps, converged);
    return {detail::rescale_to_elliptope(psd, diag_value), sweeps, converged};
}

/// Elliptope projection that throws NonConvergenceWith<HermitianMatrix>
/// (carrying the best feasible iterate) when the sweep cap is reached.
inline HermitianMatrix elliptope_project(const HermitianMatrix &x, double diag_value,
                                         const ElliptopeOptions &opt = {})
{
    ElliptopeProjection p = project_elliptope(x, diag_value, opt);
    if (!p.converged)
        throw NonConvergenceWith<HermitianMatrix>(
            "elliptope projection did not converge in " + std::to_string(opt.max_sweeps) + " sweeps", p.point);
    return std::move(p.point);
}

} // namespace fluidcap
