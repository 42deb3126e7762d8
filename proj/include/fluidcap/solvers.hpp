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

// Joint covariance and position solvers plus the reference benchmarks. Every
// entry point returns a SolveReport whose (Q, w) pairs are feasible.

#include <algorithm>
#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "fluidcap/closedform.hpp"
#include "fluidcap/rankone.hpp"
#include "fluidcap/waterfill.hpp"

namespace fluidcap
{

struct SolveOptions
{
    double tau = 2.0;
    // Grid quantization; 0 keeps each user's own K.
    int K = 0;
    // Grid step for the exhaustive benchmarks; 0 means W_u / K_u.
    double step = 0.0;
    MmOptions mm{};
    // MM rounds per block update inside the single-user alternation. The
    // alternation itself repeats until the relaxed capacity settles.
    int relaxation_mm_rounds = 1;
    // Initial positions (one vector per user); empty selects the defaults.
    std::vector<std::vector<double>> init;
    // Upper limit on position combinations enumerated by a benchmark.
    double combination_limit = 1e7;
};

// ---- Positions ---------------------------------------------------------------

/// Evenly spaced over [0, W] including both ends; a single antenna sits at 0.
inline std::vector<double> default_positions(const UserConfig &u)
{
    std::vector<double> w(static_cast<std::size_t>(u.N), 0.0);
    for (int n = 1; n < u.N; ++n)
        w[static_cast<std::size_t>(n)] = u.W * static_cast<double>(n) / static_cast<double>(u.N - 1);
    if (u.N > 1)
        w.back() = u.W;
    return w;
}

/// Half-wavelength spacing starting at 0.
inline std::vector<double> fixed_positions(const UserConfig &u)
{
    if (0.5 * (u.N - 1) > u.W)
        throw InvalidConfig("half-wavelength array of " + std::to_string(u.N) + " antennas does not fit in W = " +
                            std::to_string(u.W));
    std::vector<double> w(static_cast<std::size_t>(u.N));
    for (int n = 0; n < u.N; ++n)
        w[static_cast<std::size_t>(n)] = 0.5 * n;
    return w;
}

namespace detail
{

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start)
{
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline int grid_level(const UserConfig &u, const SolveOptions &opt) { return opt.K > 0 ? opt.K : u.K; }

inline std::vector<double> benchmark_grid(const UserConfig &u, const SolveOptions &opt)
{
    if (opt.step > 0.0)
        return stepped_grid(u.W, opt.step);
    return quantized_grid(u.W, grid_level(u, opt));
}

inline std::vector<std::vector<double>> initial_positions(const Scenario &s, const SolveOptions &opt)
{
    if (opt.init.empty())
    {
        std::vector<std::vector<double>> ws;
        for (const UserConfig &u : s.users)
            ws.push_back(default_positions(u));
        return ws;
    }
    if (opt.init.size() != s.users.size())
        throw InvalidConfig("initial positions must list every user");
    for (std::size_t u = 0; u < s.users.size(); ++u)
        (void)PositionVector(opt.init[u], s.users[u].W);
    return opt.init;
}

inline std::vector<PositionVector> as_positions(const Scenario &s, const std::vector<std::vector<double>> &ws)
{
    std::vector<PositionVector> out;
    for (std::size_t u = 0; u < ws.size(); ++u)
        out.emplace_back(ws[u], s.users[u].W);
    return out;
}

inline void require_single_antenna(const Scenario &s, std::string_view who)
{
    for (const UserConfig &u : s.users)
        if (u.N != 1)
            throw WrongSolver(std::string(who) + " needs every user to have a single antenna");
}

inline std::vector<TxCovariance> full_power(const Scenario &s)
{
    std::vector<TxCovariance> q;
    for (const UserConfig &u : s.users)
        q.push_back(TxCovariance::scalar(u.P, u.P));
    return q;
}

inline void absorb_mm(SolveReport &r, const MmResult &mm)
{
    r.mm_traces.push_back(mm.objective_trace);
    r.mm_max_diag_error = std::max(r.mm_max_diag_error, mm.max_diag_error);
    r.mm_min_eigenvalue = std::min(r.mm_min_eigenvalue, mm.min_eigenvalue);
}

inline void finish(SolveReport &r, const Scenario &s, std::vector<TxCovariance> qs,
                   const std::vector<std::vector<double>> &ws, Clock::time_point start)
{
    r.positions = as_positions(s, ws);
    r.covariances = std::move(qs);
    r.capacity_bits = sum_capacity(s, r.covariances, r.positions);
    r.runtime_ms = elapsed_ms(start);
}

// Omega_u for single-antenna users at full power.
inline HermitianMatrix full_power_interference(const Scenario &s, const std::vector<std::vector<double>> &ws,
                                               std::size_t u)
{
    CMatrix omega = CMatrix::Identity(s.M, s.M);
    for (std::size_t v = 0; v < s.users.size(); ++v)
        if (v != u)
        {
            const CMatrix g = channel_matrix(s.users[v], ws[v], s.M);
            omega.noalias() += s.users[v].P * (g * g.adjoint());
        }
    return HermitianMatrix(0.5 * (omega + omega.adjoint()));
}

} // namespace detail

// ---- Algorithm 1: alternating single-antenna updates -------------------------------------

inline SolveReport alg1_alternating(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    detail::require_single_antenna(s, "alternating position search");
    std::vector<std::vector<double>> ws = detail::initial_positions(s, opt);
    const std::vector<TxCovariance> qs = detail::full_power(s);

    SolveReport r;
    r.algorithm = "alg1";
    double current = sum_capacity(s, qs, detail::as_positions(s, ws));
    r.initial_capacity_bits = current;
    r.objective_trace.push_back(current);
    constexpr int kMaxCycles = 100;
    for (int cycle = 1; cycle <= kMaxCycles; ++cycle)
    {
        const double before = current;
        for (std::size_t u = 0; u < s.users.size(); ++u)
        {
            const HermitianMatrix omega = detail::full_power_interference(s, ws, u);
            ws[u][0] = single_user_position_update(s.users[u], s.M, omega, detail::grid_level(s.users[u], opt),
                                                   ws[u][0]);
            current = sum_capacity(s, qs, detail::as_positions(s, ws));
            r.objective_trace.push_back(current);
        }
        r.iterations = cycle;
        if (current - before < 1e-8)
            break;
    }
    r.rank_residuals.assign(s.users.size(), 0.0);
    detail::finish(r, s, qs, ws, start);
    return r;
}

// ---- Algorithm 2: joint rank-one relaxation for single-antenna users --------------------

inline SolveReport alg2_joint(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    detail::require_single_antenna(s, "joint rank-one relaxation");
    const std::vector<std::vector<double>> init = detail::initial_positions(s, opt);
    const std::vector<TxCovariance> qs = detail::full_power(s);

    std::vector<CMatrix> factors;
    std::vector<RankOneBlock> blocks;
    std::vector<std::vector<double>> thetas;
    for (std::size_t u = 0; u < s.users.size(); ++u)
    {
        const UserConfig &user = s.users[u];
        factors.push_back(std::sqrt(user.P * static_cast<double>(s.M)) *
                          (receive_steering_matrix(user.paths, s.M) * user.paths.gains().asDiagonal()));
        thetas.push_back(user.paths.aods());
        blocks.push_back(j_outer(init[u][0], thetas.back(), 1.0));
    }
    const LogDetObjective objective(std::move(factors));
    MmOptions mm = opt.mm;
    mm.tau = opt.tau;
    const MmResult res = mm_elliptope_solve(objective, blocks, mm);

    SolveReport r;
    r.algorithm = "alg2";
    r.initial_capacity_bits = sum_capacity(s, qs, detail::as_positions(s, init));
    detail::absorb_mm(r, res);
    r.objective_trace = res.objective_trace;
    r.rank_residuals = res.final_residuals;
    r.iterations = res.outer_iterations;

    std::vector<std::vector<double>> ws(s.users.size());
    for (std::size_t u = 0; u < s.users.size(); ++u)
    {
        std::set<std::size_t> excluded;
        const std::vector<double> grid = quantized_grid(s.users[u].W, detail::grid_level(s.users[u], opt));
        ws[u] = map_positions({res.blocks[u]}, {thetas[u]}, grid, excluded);
    }
    detail::finish(r, s, qs, ws, start);
    return r;
}

// ---- Algorithm 3: one multi-antenna user ---------------------------------------------------

struct SingleUserOutcome
{
    std::vector<double> positions;
    TxCovariance covariance;
    double capacity_bits = 0.0; // log2|I + G_eff Q G_eff^H|
    std::vector<double> relaxed_trace;
    std::vector<double> rank_residuals;
    int iterations = 0;
};

namespace detail
{

// sqrt(M N) A_eff Gamma A_T(w)^H for a (possibly whitened) receive matrix.
inline CMatrix effective_user_channel(const UserConfig &u, const CMatrix &a_eff, std::span<const double> w)
{
    const double scale = std::sqrt(static_cast<double>(a_eff.rows()) * u.N);
    return scale * a_eff * u.paths.gains().asDiagonal() * transmit_steering_matrix(u.paths, w).adjoint();
}

} // namespace detail

/// Relaxation-based position and covariance design for one user whose
/// receive steering matrix (possibly whitened) is `a_eff` (M x L).
///
/// Alternates water-filling of the receive-side covariance F with an MM
/// update of the N relaxed position blocks, then maps the blocks onto N
/// distinct grid points and water-fills the transmit covariance there.
inline SingleUserOutcome single_user_relaxation(const UserConfig &u, const CMatrix &a_eff,
                                                const std::vector<double> &init_w, int K, const MmOptions &mm,
                                                SolveReport &diag)
{
    const Index m = a_eff.rows();
    const int n = u.N;
    const double c = 1.0 / n;
    const std::vector<double> thetas = u.paths.aods();
    const CMatrix ag = a_eff * u.paths.gains().asDiagonal();
    const double mn = static_cast<double>(m) * n;

    std::vector<RankOneBlock> blocks;
    for (double w : init_w)
        blocks.push_back(j_outer(w, thetas, c));

    SingleUserOutcome out{{}, TxCovariance::zero(n, u.P), 0.0, {}, {}, 0};
    constexpr int kMaxRounds = 50;
    double previous = -1.0;
    for (int round = 1; round <= kMaxRounds; ++round)
    {
        CMatrix sum = CMatrix::Zero(u.L(), u.L());
        for (const RankOneBlock &b : blocks)
            sum += b.matrix().matrix();
        const CMatrix k = std::sqrt(mn) * ag * psd_sqrt(HermitianMatrix(0.5 * (sum + sum.adjoint())));
        const WaterfillResult f = waterfill(k.adjoint(), u.P);
        out.relaxed_trace.push_back(f.capacity_bits);
        out.iterations = round;
        if (previous >= 0.0 && std::abs(f.capacity_bits - previous) < 1e-6)
            break;
        previous = f.capacity_bits;

        const CMatrix phi_raw = mn * ag.adjoint() * f.covariance.matrix().matrix() * ag;
        const CMatrix root = psd_sqrt(HermitianMatrix(0.5 * (phi_raw + phi_raw.adjoint())));
        const LogDetObjective objective(std::vector<CMatrix>(static_cast<std::size_t>(n), root));
        MmResult res = mm_elliptope_solve(objective, blocks, mm);
        detail::absorb_mm(diag, res);
        blocks = std::move(res.blocks);
    }
    for (const RankOneBlock &b : blocks)
        out.rank_residuals.push_back(rank_residual(b));

    std::set<std::size_t> excluded;
    const std::vector<double> grid = quantized_grid(u.W, K);
    const std::vector<std::vector<double>> angle_lists(static_cast<std::size_t>(n), thetas);
    out.positions = map_positions(blocks, angle_lists, grid, excluded);
    const WaterfillResult q = waterfill(detail::effective_user_channel(u, a_eff, out.positions), u.P);
    out.covariance = q.covariance;
    out.capacity_bits = q.capacity_bits;
    return out;
}

inline SolveReport alg3_single_user(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    if (s.users.size() != 1)
        throw WrongSolver("single-user relaxation needs exactly one user");
    const UserConfig &u = s.users.front();
    if (detail::grid_level(u, opt) < u.N)
        throw InvalidConfig("grid must offer at least N positions");
    const std::vector<std::vector<double>> init = detail::initial_positions(s, opt);
    MmOptions mm = opt.mm;
    mm.tau = opt.tau;
    mm.max_outer = opt.relaxation_mm_rounds;

    SolveReport r;
    r.algorithm = "alg3";
    r.initial_capacity_bits = waterfill(channel_matrix(u, init[0], s.M), u.P).capacity_bits;
    SingleUserOutcome o =
        single_user_relaxation(u, receive_steering_matrix(u.paths, s.M), init[0], detail::grid_level(u, opt), mm, r);
    r.objective_trace = o.relaxed_trace;
    r.rank_residuals = o.rank_residuals;
    r.iterations = o.iterations;
    detail::finish(r, s, {o.covariance}, {o.positions}, start);
    return r;
}

// ---- Algorithm 4: multiuser, one user at a time ----------------------------------------

inline SolveReport alg4_multiuser(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    for (const UserConfig &u : s.users)
        if (detail::grid_level(u, opt) < u.N)
            throw InvalidConfig("grid must offer at least N positions");
    std::vector<std::vector<double>> ws = detail::initial_positions(s, opt);
    MmOptions mm = opt.mm;
    mm.tau = opt.tau;
    mm.max_outer = opt.relaxation_mm_rounds;

    SolveReport r;
    r.algorithm = "alg4";
    std::vector<CMatrix> channels = channels_of(s, detail::as_positions(s, ws));
    std::vector<double> budgets;
    for (const UserConfig &u : s.users)
        budgets.push_back(u.P);
    std::vector<TxCovariance> qs = iterative_waterfill(channels, budgets).covariances;
    double current = sum_capacity(channels, qs);
    r.initial_capacity_bits = current;
    r.objective_trace.push_back(current);
    r.rank_residuals.assign(s.users.size(), 0.0);

    constexpr int kMaxSweeps = 50;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep)
    {
        const double before = current;
        for (std::size_t u = 0; u < s.users.size(); ++u)
        {
            const UserConfig &user = s.users[u];
            const HermitianMatrix omega = interference_matrix(channels, qs, u);
            const Whitener wh = make_whitener(omega);
            const CMatrix a_eff = whiten(wh, receive_steering_matrix(user.paths, s.M));
            SingleUserOutcome o =
                single_user_relaxation(user, a_eff, ws[u], detail::grid_level(user, opt), mm, r);
            const double candidate = wh.logdet_omega + o.capacity_bits;
            // Accept only strict improvements.
            if (candidate > current)
            {
                ws[u] = o.positions;
                qs[u] = o.covariance;
                channels[u] = channel_matrix(user, ws[u], s.M);
                current = sum_capacity(channels, qs);
                r.rank_residuals[u] = *std::max_element(o.rank_residuals.begin(), o.rank_residuals.end());
            }
            r.objective_trace.push_back(current);
        }
        r.iterations = sweep;
        if (current - before < 1e-6)
            break;
    }
    detail::finish(r, s, qs, ws, start);
    return r;
}

// ---- Benchmarks ------------------------------------------------------------------------

/// Half-wavelength arrays at the origin with iteratively water-filled covariances.
inline SolveReport benchmark_fixed(const Scenario &s, const SolveOptions & = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    std::vector<std::vector<double>> ws;
    for (const UserConfig &u : s.users)
        ws.push_back(fixed_positions(u));
    const std::vector<CMatrix> channels = channels_of(s, detail::as_positions(s, ws));
    std::vector<double> budgets;
    for (const UserConfig &u : s.users)
        budgets.push_back(u.P);
    IwfResult iwf = iterative_waterfill(channels, budgets);

    SolveReport r;
    r.algorithm = "fixed";
    r.objective_trace = iwf.trace;
    r.iterations = iwf.cycles;
    r.rank_residuals.assign(s.users.size(), 0.0);
    detail::finish(r, s, std::move(iwf.covariances), ws, start);
    r.initial_capacity_bits = r.capacity_bits;
    return r;
}

/// Exhaustive search over the grid product for single-antenna users at full power.
inline SolveReport benchmark_es(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    detail::require_single_antenna(s, "exhaustive search");
    const std::size_t users = s.users.size();

    std::vector<std::vector<double>> grids;
    double combos = 1.0;
    for (const UserConfig &u : s.users)
    {
        grids.push_back(detail::benchmark_grid(u, opt));
        combos *= static_cast<double>(grids.back().size());
    }
    if (combos > opt.combination_limit)
        throw BudgetExceeded("exhaustive search would visit " + std::to_string(combos) + " combinations");

    // Scaled channel vectors sqrt(P_u) g_u(w) for every grid point.
    std::vector<CMatrix> h(users);
    for (std::size_t u = 0; u < users; ++u)
    {
        const UserConfig &user = s.users[u];
        h[u].resize(s.M, static_cast<Index>(grids[u].size()));
        for (std::size_t k = 0; k < grids[u].size(); ++k)
            h[u].col(static_cast<Index>(k)) =
                std::sqrt(user.P) * channel_matrix(user, std::span<const double>(&grids[u][k], 1), s.M).col(0);
    }

    std::vector<std::size_t> idx(users, 0), best_idx(users, 0);
    double best = -1.0;
    const Index nu = static_cast<Index>(users);
    CMatrix gram(nu, nu);
    for (;;)
    {
        for (Index a = 0; a < nu; ++a)
            for (Index b = a; b < nu; ++b)
            {
                gram(a, b) = h[a].col(static_cast<Index>(idx[a])).dot(h[b].col(static_cast<Index>(idx[b])));
                gram(b, a) = std::conj(gram(a, b));
            }
        gram += CMatrix::Identity(nu, nu);
        const double c = users == 1 ? std::log2(gram(0, 0).real()) : logdet_hpd(HermitianMatrix(gram));
        if (c > best + detail::kGridTieTol)
        {
            best = c;
            best_idx = idx;
        }
        // Odometer increment; wrapping the first digit ends the enumeration.
        bool wrapped = true;
        for (std::size_t pos = users; pos-- > 0;)
        {
            if (++idx[pos] < grids[pos].size())
            {
                wrapped = false;
                break;
            }
            idx[pos] = 0;
        }
        if (wrapped)
            break;
    }

    SolveReport r;
    r.algorithm = "es";
    std::vector<std::vector<double>> ws;
    for (std::size_t u = 0; u < users; ++u)
        ws.push_back({grids[u][best_idx[u]]});
    r.objective_trace.push_back(best);
    r.iterations = 1;
    r.rank_residuals.assign(users, 0.0);
    detail::finish(r, s, detail::full_power(s), ws, start);
    r.initial_capacity_bits = r.capacity_bits;
    return r;
}

namespace detail
{

// Gram table T(i, j) = M N r_i Psi' r_j^H for a single user, where r_k is
// row k of A_T over the grid and Psi' = Gamma^H A^H A Gamma. The channel
// Gram matrix of any antenna subset is the matching sub-table.
inline CMatrix position_gram_table(const UserConfig &u, const CMatrix &a_eff, std::span<const double> grid)
{
    const CMatrix ag = a_eff * u.paths.gains().asDiagonal();
    const CMatrix psi = ag.adjoint() * ag;
    CMatrix rows(static_cast<Index>(grid.size()), u.L());
    for (std::size_t k = 0; k < grid.size(); ++k)
        rows.row(static_cast<Index>(k)) = transmit_phases(u.paths.aods(), grid[k]).transpose();
    const double scale = static_cast<double>(a_eff.rows()); // M N * (1/sqrt N)^2
    CMatrix t = scale * rows * psi * rows.adjoint();
    return 0.5 * (t + t.adjoint());
}

// Water-filled capacity of an antenna subset, from its Gram sub-table.
inline double subset_capacity(const CMatrix &table, std::span<const std::size_t> subset, double budget)
{
    using Small = Eigen::Matrix<cdouble, Eigen::Dynamic, Eigen::Dynamic, 0, 16, 16>;
    const Index n = static_cast<Index>(subset.size());
    if (n > 16)
    {
        CMatrix g(n, n);
        for (Index a = 0; a < n; ++a)
            for (Index b = 0; b < n; ++b)
                g(a, b) = table(static_cast<Index>(subset[static_cast<std::size_t>(a)]),
                                static_cast<Index>(subset[static_cast<std::size_t>(b)]));
        Eigen::SelfAdjointEigenSolver<CMatrix> es(g, Eigen::EigenvaluesOnly);
        RVector gains = es.eigenvalues();
        const double top = gains.maxCoeff();
        for (Index k = 0; k < n; ++k)
            if (!(gains(k) > kModeTol * top) || top <= 0.0)
                gains(k) = 0.0;
        const ModePowers mp = waterfill_gains(gains, budget);
        double cap = 0.0;
        for (Index k = 0; k < n; ++k)
            cap += std::log2(1.0 + gains(k) * mp.powers(k));
        return cap;
    }
    Small g(n, n);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b)
            g(a, b) = table(static_cast<Index>(subset[static_cast<std::size_t>(a)]),
                            static_cast<Index>(subset[static_cast<std::size_t>(b)]));
    Eigen::SelfAdjointEigenSolver<Small> es(g, Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues(); // ascending
    const double top = ev(n - 1);
    if (!(top > 0.0) || budget == 0.0)
        return 0.0;
    // Water level over the strongest modes, as in waterfill_gains.
    double inv_sum = 0.0, level = 0.0;
    Index active = 0;
    for (Index k = 0; k < n; ++k)
    {
        const double gk = ev(n - 1 - k);
        if (!(gk > kModeTol * top))
            break;
        const double candidate = (budget + inv_sum + 1.0 / gk) / static_cast<double>(k + 1);
        if (candidate <= 1.0 / gk)
            break;
        inv_sum += 1.0 / gk;
        level = candidate;
        active = k + 1;
    }
    double cap = 0.0;
    for (Index k = 0; k < active; ++k)
    {
        const double gk = ev(n - 1 - k);
        cap += std::log2(1.0 + gk * std::max(0.0, level - 1.0 / gk));
    }
    return cap;
}

inline double binomial(std::size_t n, std::size_t k)
{
    if (k > n)
        return 0.0;
    double r = 1.0;
    for (std::size_t i = 1; i <= k; ++i)
        r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
    return r;
}

} // namespace detail

/// Single-user benchmark: water-filling alternated with exhaustive search over
/// every set of N distinct grid points. Each candidate set is scored with its
/// own water-filled covariance, so the search returns the best pair directly.
inline SolveReport benchmark_iwf_es(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    if (s.users.size() != 1)
        throw WrongSolver("IWF-ES benchmark is defined for a single user");
    const UserConfig &u = s.users.front();
    const std::vector<double> grid = detail::benchmark_grid(u, opt);
    const std::size_t n = static_cast<std::size_t>(u.N);
    if (grid.size() < n)
        throw InvalidConfig("grid must offer at least N positions");
    const double combos = detail::binomial(grid.size(), n);
    if (combos > opt.combination_limit)
        throw BudgetExceeded("IWF-ES would visit " + std::to_string(combos) + " position sets");

    const CMatrix table = detail::position_gram_table(u, receive_steering_matrix(u.paths, s.M), grid);

    SolveReport r;
    r.algorithm = "iwf-es";
    std::vector<double> w = default_positions(u);
    TxCovariance q = waterfill_p2p(channel_matrix(u, w, s.M), u.P);
    r.initial_capacity_bits = sum_capacity(s, std::vector<TxCovariance>{q}, detail::as_positions(s, {w}));

    // Exhaustive step over all N-subsets in lexicographic order. The score of
    // a subset does not depend on the current covariance, so one pass
    // already lands on the fixed point of the alternation.
    std::vector<std::size_t> subset(n), best_subset;
    for (std::size_t i = 0; i < n; ++i)
        subset[i] = i;
    double best = -1.0;
    for (;;)
    {
        const double c = detail::subset_capacity(table, subset, u.P);
        if (c > best + detail::kGridTieTol)
        {
            best = c;
            best_subset = subset;
        }
        std::size_t i = n;
        while (i > 0 && subset[i - 1] == grid.size() - n + (i - 1))
            --i;
        if (i == 0)
            break;
        ++subset[i - 1];
        for (std::size_t j = i; j < n; ++j)
            subset[j] = subset[j - 1] + 1;
    }
    w.clear();
    for (std::size_t i : best_subset)
        w.push_back(grid[i]);

    // Water-filling step at the chosen positions.
    const WaterfillResult wf = waterfill(channel_matrix(u, w, s.M), u.P);
    q = wf.covariance;
    r.iterations = 1;
    r.objective_trace.push_back(wf.capacity_bits);
    r.rank_residuals.assign(1, 0.0);
    detail::finish(r, s, {q}, {w}, start);
    return r;
}

/// Water-filling alternated with coordinate-wise grid search: one antenna at
/// a time over the grid points not held by the user's other antennas.
inline SolveReport benchmark_simplified_iwf_es(const Scenario &s, const SolveOptions &opt = {})
{
    const auto start = detail::Clock::now();
    validate(s);
    const std::size_t users = s.users.size();
    std::vector<std::vector<double>> grids;
    std::vector<std::vector<std::size_t>> slots(users); // grid index of every antenna
    std::vector<std::vector<double>> ws(users);
    for (std::size_t u = 0; u < users; ++u)
    {
        const UserConfig &user = s.users[u];
        grids.push_back(detail::benchmark_grid(user, opt));
        const std::vector<double> &g = grids.back();
        if (g.size() < static_cast<std::size_t>(user.N))
            throw InvalidConfig("grid must offer at least N positions");
        // Snap the default positions onto distinct grid points.
        std::set<std::size_t> used;
        for (double w : default_positions(user))
        {
            std::size_t pick = g.size();
            for (std::size_t k = 0; k < g.size(); ++k)
                if (!used.contains(k) && (pick == g.size() || std::abs(g[k] - w) < std::abs(g[pick] - w)))
                    pick = k;
            used.insert(pick);
            slots[u].push_back(pick);
            ws[u].push_back(g[pick]);
        }
    }

    std::vector<CMatrix> channels = channels_of(s, detail::as_positions(s, ws));
    std::vector<double> budgets;
    for (const UserConfig &u : s.users)
        budgets.push_back(u.P);
    std::vector<TxCovariance> qs = iterative_waterfill(channels, budgets).covariances;
    double current = sum_capacity(channels, qs);

    SolveReport r;
    r.algorithm = "siwf-es";
    r.initial_capacity_bits = current;
    r.objective_trace.push_back(current);

    constexpr int kMaxSweeps = 50;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep)
    {
        const double before = current;
        for (std::size_t u = 0; u < users; ++u)
        {
            const UserConfig &user = s.users[u];
            const HermitianMatrix omega = interference_matrix(channels, qs, u);
            const Whitener wh = make_whitener(omega);
            const CMatrix table =
                detail::position_gram_table(user, whiten(wh, receive_steering_matrix(user.paths, s.M)), grids[u]);
            for (std::size_t n = 0; n < slots[u].size(); ++n)
            {
                std::vector<std::size_t> trial = slots[u];
                const double incumbent = detail::subset_capacity(table, trial, user.P);
                double best = -1.0;
                std::size_t best_k = slots[u][n];
                for (std::size_t k = 0; k < grids[u].size(); ++k)
                {
                    if (k != slots[u][n] && std::find(slots[u].begin(), slots[u].end(), k) != slots[u].end())
                        continue;
                    trial[n] = k;
                    const double c = detail::subset_capacity(table, trial, user.P);
                    if (c > best + detail::kGridTieTol)
                    {
                        best = c;
                        best_k = k;
                    }
                }
                if (best > incumbent + detail::kGridTieTol)
                {
                    slots[u][n] = best_k;
                    ws[u][n] = grids[u][best_k];
                }
            }
            // Water-filling step for this user at its new positions.
            channels[u] = channel_matrix(user, ws[u], s.M);
            const WaterfillResult wf = waterfill(whiten(wh, channels[u]), user.P);
            std::vector<TxCovariance> trial_qs = qs;
            trial_qs[u] = wf.covariance;
            const double c = sum_capacity(channels, trial_qs);
            if (c >= current - 1e-12)
            {
                qs = std::move(trial_qs);
                current = std::max(current, c);
            }
            r.objective_trace.push_back(current);
        }
        r.iterations = sweep;
        if (current - before < 1e-6)
            break;
    }
    r.rank_residuals.assign(users, 0.0);
    detail::finish(r, s, qs, ws, start);
    return r;
}

// ---- Dispatch -------------------------------------------------------------------------

inline const std::vector<std::string> &solver_names()
{
    static const std::vector<std::string> names{"alg1", "alg2", "alg3", "alg4", "fixed", "es", "iwf-es", "siwf-es"};
    return names;
}

inline SolveReport solve(std::string_view name, const Scenario &s, const SolveOptions &opt = {})
{
    if (name == "alg1")
        return alg1_alternating(s, opt);
    if (name == "alg2")
        return alg2_joint(s, opt);
    if (name == "alg3")
        return alg3_single_user(s, opt);
    if (name == "alg4")
        return alg4_multiuser(s, opt);
    if (name == "fixed")
        return benchmark_fixed(s, opt);
    if (name == "es")
        return benchmark_es(s, opt);
    if (name == "iwf-es")
        return benchmark_iwf_es(s, opt);
    if (name == "siwf-es")
        return benchmark_simplified_iwf_es(s, opt);
    throw InvalidConfig("unknown algorithm '" + std::string(name) + "'");
}

} // namespace fluidcap
