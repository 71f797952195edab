// SPDX-License-Identifier: Apache-2.0
//
// fdmimo: 3D spatial correlation and elevation beamforming toolkit
// Copyright (C) 2026 The fdmimo authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "fdmimo/beamforming.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/maxmin_sdp.hpp"
#include "test_util.hpp"

using namespace fdmimo;
using fdmimo::testing::random_density;
using fdmimo::testing::random_psd;

namespace {

std::vector<ElementCorrelationMatrix> random_users(int k, int n_e, int n_bs, Rng &rng)
{
    std::vector<ElementCorrelationMatrix> out;
    for (int i = 0; i < k; ++i) {
        ElementCorrelationMatrix re;
        re.geometry.n_e = n_e;
        re.geometry.n_bs = n_bs;
        re.entries = random_psd(n_e * n_bs, rng);
        out.push_back(re);
    }
    return out;
}

ElementCorrelationMatrix diag_user(const std::vector<double> &d)
{
    ElementCorrelationMatrix re;
    re.geometry.n_e = static_cast<int>(d.size());
    re.geometry.n_bs = 1;
    re.entries = CMatrix::Zero(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        re.entries(i, i) = d[i];
    return re;
}

// sum_{l != k} sum_{s,s'} tr(W R_{k,ss'} W R_{l,s's}) straight from the blocks
double g2_direct(int k, const CMatrix &w, const std::vector<ElementCorrelationMatrix> &users)
{
    const int nb = users[0].geometry.n_bs;
    double sum = 0.0;
    for (std::size_t l = 0; l < users.size(); ++l) {
        if (static_cast<int>(l) == k)
            continue;
        for (int s = 0; s < nb; ++s)
            for (int t = 0; t < nb; ++t)
                sum += (w * users[k].block(s, t) * w * users[l].block(t, s)).trace().real();
    }
    return sum;
}

CMatrix kron(const CMatrix &a, const CMatrix &b)
{
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

CVector vec_of(const CMatrix &m)
{
    return Eigen::Map<const CVector>(m.data(), m.size());
}

} // namespace

TEST(SdbProblem, FIdentityCase)
{
    std::vector<ElementCorrelationMatrix> users(2);
    for (auto &u : users) {
        u.geometry.n_e = 3;
        u.geometry.n_bs = 4;
        u.entries = CMatrix::Identity(12, 12);
    }
    const SdbProblem p(users);
    EXPECT_NEAR(p.f(0, CMatrix::Identity(3, 3) / 3.0), 4.0, 1e-12);
}

TEST(SdbProblem, FLinearAndVecForm)
{
    Rng rng(1);
    const auto users = random_users(3, 4, 3, rng);
    const SdbProblem p(users);
    const CMatrix w1 = random_density(4, rng), w2 = random_density(4, rng);
    for (int k = 0; k < 3; ++k) {
        const double a = 0.3;
        EXPECT_NEAR(p.f(k, a * w1 + (1 - a) * w2), a * p.f(k, w1) + (1 - a) * p.f(k, w2), 1e-12 * p.scale());
        CMatrix r = CMatrix::Zero(4, 4);
        for (int s = 0; s < 3; ++s)
            r += users[k].block(s, s);
        const cplx vf = vec_of(CMatrix(w1.transpose())).transpose() * vec_of(r);
        EXPECT_NEAR(p.f(k, w1), vf.real(), 1e-12 * p.scale());
        EXPECT_GE(p.f(k, w1), 0.0);
    }
}

TEST(SdbProblem, GMatchesDirectAndKroneckerForms)
{
    Rng rng(2);
    const auto users = random_users(3, 3, 4, rng);
    const SdbProblem p(users);
    for (int t = 0; t < 5; ++t) {
        const CMatrix w = random_density(3, rng);
        for (int k = 0; k < 3; ++k) {
            const double direct = g2_direct(k, w, users);
            EXPECT_NEAR(p.g_squared(k, w), direct, 1e-10 * direct);
            // Kronecker form: sum_{s,s'} vec(W)^H ((S_{s's})^T (x) R_{k,ss'}) vec(W)
            CMatrix q = CMatrix::Zero(9, 9);
            for (int s = 0; s < 4; ++s)
                for (int u = 0; u < 4; ++u) {
                    CMatrix sl = CMatrix::Zero(3, 3);
                    for (int l = 0; l < 3; ++l)
                        if (l != k)
                            sl += users[l].block(u, s);
                    q += kron(sl.transpose(), users[k].block(s, u));
                }
            const cplx kr = vec_of(w).dot(q * vec_of(w));
            EXPECT_NEAR(p.g_squared(k, w), kr.real(), 1e-10 * direct);
        }
    }
}

TEST(SdbProblem, SingleUserHasNoInterference)
{
    Rng rng(3);
    const auto users = random_users(1, 3, 2, rng);
    const SdbProblem p(users);
    const CMatrix w = random_density(3, rng);
    EXPECT_EQ(p.g(0, w), 0.0);
    EXPECT_TRUE(is_interference_free(p.ratio(0, w)));
}

TEST(SdbProblem, GIsConvex)
{
    Rng rng(4);
    const auto users = random_users(3, 4, 2, rng);
    const SdbProblem p(users);
    for (int t = 0; t < 100; ++t) {
        const CMatrix a = random_density(4, rng), b = random_density(4, rng);
        for (int k = 0; k < 3; ++k)
            EXPECT_LE(p.g(k, 0.5 * (a + b)), 0.5 * (p.g(k, a) + p.g(k, b)) + 1e-12 * p.scale());
    }
}

TEST(SdbProblem, SupergradientMatchesFiniteDifferences)
{
    Rng rng(5);
    const auto users = random_users(3, 4, 2, rng);
    const SdbProblem p(users);
    const double lambda = 0.7;
    for (int t = 0; t < 20; ++t) {
        const CMatrix w = random_density(4, rng);
        const int k = t % 3;
        if (p.g(k, w) <= 1e-8)
            continue;
        const CMatrix grad = p.diag_sum(k) - lambda * p.grad_g(k, w);
        auto h = [&](const CMatrix &x) { return p.f(k, x) - lambda * p.g(k, x); };
        for (int d = 0; d < 10; ++d) {
            CMatrix dir = fdmimo::testing::random_hermitian(4, rng);
            dir /= dir.norm();
            const double step = 1e-6;
            const double fd = (h(w + step * dir) - h(w - step * dir)) / (2 * step);
            const double an = (grad * dir).trace().real();
            EXPECT_NEAR(fd, an, 1e-5 * std::max(1.0, std::abs(an)));
        }
    }
}

TEST(Projection, SimplexBasics)
{
    RVector v(4);
    v << 0.2, 0.9, -0.4, 0.1;
    const RVector x = project_to_simplex(v);
    EXPECT_NEAR(x.sum(), 1.0, 1e-15);
    EXPECT_GE(x.minCoeff(), 0.0);
    RVector inside(3);
    inside << 0.2, 0.3, 0.5;
    EXPECT_LE((project_to_simplex(inside) - inside).norm(), 1e-15);
}

TEST(Projection, SpectrahedronIsNearestFeasiblePoint)
{
    Rng rng(6);
    for (int t = 0; t < 5; ++t) {
        const CMatrix a = fdmimo::testing::random_hermitian(3, rng);
        const CMatrix x = project_to_spectrahedron(a);
        EXPECT_NEAR(x.trace().real(), 1.0, 1e-12);
        EXPECT_LE(hermitian_defect(x), 1e-12);
        EXPECT_GE(eigen_range(x).first, -1e-12);
        const double d = (x - a).norm();
        for (int c = 0; c < 10000; ++c) {
            const CMatrix y = random_density(3, rng, 1 + c % 3);
            ASSERT_GE((y - a).norm(), d - 1e-12);
        }
    }
}

TEST(InnerSolver, LinearObjectiveFindsTopEigenvector)
{
    Rng rng(7);
    const CVector u = fdmimo::testing::random_unit(4, rng);
    ElementCorrelationMatrix re;
    re.geometry.n_e = 4;
    re.geometry.n_bs = 1;
    re.entries = CMatrix::Identity(4, 4) * 0.1 + u * u.adjoint();
    const std::vector<ElementCorrelationMatrix> users{re, re};
    const SdbProblem p(users);
    const InnerResult r = inner_maxmin(0.0, p, SolverConfig{});
    EXPECT_LE((r.w - u * u.adjoint()).norm(), 1e-3);
}

TEST(InnerSolver, BeatsRandomSearchAtTinyScale)
{
    Rng rng(8);
    const auto users = random_users(2, 2, 3, rng);
    const SdbProblem p(users);
    const CMatrix i2 = CMatrix::Identity(2, 2) / 2.0;
    const double lambda = 0.5 * std::min(p.ratio(0, i2), p.ratio(1, i2));
    for (InnerMethod m : {InnerMethod::supergradient, InnerMethod::smoothed}) {
        SolverConfig cfg;
        cfg.inner_method = m;
        const InnerResult r = inner_maxmin(lambda, p, cfg);
        const double got = p.objective(lambda, r.w);
        EXPECT_NEAR(got, r.objective, 1e-12 * p.scale());
        double best = -1e300;
        for (int t = 0; t < 100000; ++t)
            best = std::max(best, p.objective(lambda, random_density(2, rng, 1 + t % 2)));
        EXPECT_GE(got, best - cfg.inner_tol * p.scale());
    }
}

TEST(Dinkelbach, OrthogonalPairContracts)
{
    const std::vector<ElementCorrelationMatrix> users{diag_user({1.0, 0.1}), diag_user({0.1, 1.0})};
    const SdbProblem p(users);
    const SolverConfig cfg;
    const DinkelbachState st = dinkelbach(p, cfg);
    EXPECT_TRUE(st.converged);
    EXPECT_LE(st.iteration, 50);
    ASSERT_FALSE(st.history.empty());
    EXPECT_EQ(st.history.front().lambda_in, 0.0);
    for (std::size_t i = 1; i < st.history.size(); ++i)
        EXPECT_GE(st.history[i].lambda_in, st.history[i - 1].lambda_in);
    EXPECT_LT(st.f_value, cfg.eps);
    EXPECT_GE(st.f_value, -1e-12);
    const CMatrix i2 = CMatrix::Identity(2, 2) / 2.0;
    EXPECT_GE(std::min(p.ratio(0, st.w_star), p.ratio(1, st.w_star)),
              std::min(p.ratio(0, i2), p.ratio(1, i2)) - 1e-12);
    EXPECT_NEAR(st.lambda * st.lambda / p.min_sir(st.w_star), 1.0, 1e-6);
}

TEST(Dinkelbach, RandomInstancesAreMonotone)
{
    Rng rng(9);
    for (int t = 0; t < 3; ++t) {
        const auto users = random_users(4, 3, 4, rng);
        const SdbProblem p(users);
        const DinkelbachState st = dinkelbach(p, SolverConfig{});
        for (std::size_t i = 1; i < st.history.size(); ++i)
            EXPECT_GE(st.history[i].lambda_in, st.history[i - 1].lambda_in);
        EXPECT_NEAR(st.lambda * st.lambda / p.min_sir(st.w_star), 1.0, 1e-6);
        EXPECT_NEAR(st.w_star.trace().real(), 1.0, 1e-9);
        EXPECT_GE(eigen_range(st.w_star).first, -1e-9);
    }
}

TEST(Dinkelbach, FinalRatioNeverStepsBack)
{
    Rng rng(31);
    for (int t = 0; t < 3; ++t) {
        const auto users = random_users(5, 4, 4, rng);
        const SdbProblem p(users);
        const DinkelbachState st = dinkelbach(p, SolverConfig{});
        ASSERT_FALSE(st.history.empty());
        EXPECT_GE(st.lambda, st.history.back().lambda_in);
    }
}

TEST(InnerSolver, FeasibleStartIsKeptExactly)
{
    Rng rng(32);
    const auto users = random_users(3, 4, 4, rng);
    const SdbProblem p(users);
    CMatrix w = random_psd(4, rng);
    w /= w.trace().real();
    SolverConfig cfg;
    cfg.inner_max_iter = 1;
    cfg.inner_plateau = 1;
    // a lambda large enough that the first step cannot improve, so the start comes back
    const InnerResult r = inner_maxmin(1e6, p, cfg, w);
    EXPECT_EQ((r.w - w).norm(), 0.0);
}

TEST(Dinkelbach, RejectsSingleUser)
{
    Rng rng(10);
    const SdbProblem p(random_users(1, 3, 2, rng));
    EXPECT_ANY_THROW(dinkelbach(p, SolverConfig{}));
}

TEST(Dinkelbach, ScaleInvariant)
{
    Rng rng(11);
    auto users = random_users(3, 3, 3, rng);
    const DinkelbachState a = dinkelbach(SdbProblem(users), SolverConfig{});
    for (auto &u : users)
        u.entries *= 7.0;
    const DinkelbachState b = dinkelbach(SdbProblem(users), SolverConfig{});
    EXPECT_LE((a.w_star - b.w_star).norm(), 1e-4);
    EXPECT_NEAR(a.lambda / b.lambda, 1.0, 1e-4);
}

TEST(Randomization, RankOneAllOnesIsDegenerate)
{
    Rng rng(12);
    const auto users = random_users(3, 4, 2, rng);
    const SdbProblem p(users);
    const CMatrix w = CMatrix::Ones(4, 4) / 4.0;
    const auto r = gaussian_randomization(w, p, 50, 3);
    for (double s : r.trial_min_sir)
        EXPECT_NEAR(s / r.trial_min_sir.front(), 1.0, 1e-6);
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(std::abs(r.w_star(i)), 0.5, 1e-12);
}

TEST(Randomization, BoundedByRelaxationAndMonotoneInTrials)
{
    Rng rng(13);
    const auto users = random_users(4, 4, 3, rng);
    const SdbProblem p(users);
    const auto sol = solve_sdb(p, SolverConfig{}, 77);
    EXPECT_LE(sol.extracted.achieved_min_sir, sol.sdr_bound * (1 + 1e-9));
    EXPECT_NEAR(sol.extracted.w_star.norm(), 1.0, 1e-12);
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(std::abs(sol.extracted.w_star(i)), 0.5, 1e-12);
    const auto l100 = gaussian_randomization(sol.relaxed.w_star, p, 100, 77);
    const auto l400 = gaussian_randomization(sol.relaxed.w_star, p, 400, 77, 2);
    EXPECT_EQ(l100.achieved_min_sir, sol.extracted.achieved_min_sir);
    EXPECT_GE(l400.achieved_min_sir, l100.achieved_min_sir);
    for (int l = 0; l < 100; ++l)
        EXPECT_EQ(l100.trial_min_sir[l], l400.trial_min_sir[l]);
    EXPECT_NEAR(p.min_sir_vector(l400.w_star), l400.achieved_min_sir, 1e-12 * l400.achieved_min_sir);
    const auto ev = eigenvector_extraction(sol.relaxed.w_star, p);
    EXPECT_LE(ev.achieved_min_sir, sol.sdr_bound * (1 + 1e-9));
}

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.trials = 0;
    EXPECT_ANY_THROW(c.validate());
}
