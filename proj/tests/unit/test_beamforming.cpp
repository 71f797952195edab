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
#include "fdmimo/channel.hpp"
#include "fdmimo/linalg.hpp"
#include "test_util.hpp"

using namespace fdmimo;
using fdmimo::testing::random_unit;
using fdmimo::testing::validation_geometry;
using fdmimo::testing::validation_spectrum;

namespace {

ElementCorrelationMatrix make_re(const CMatrix &m, int n_e, int n_bs)
{
    ElementCorrelationMatrix re;
    re.geometry.n_e = n_e;
    re.geometry.n_bs = n_bs;
    re.entries = m;
    return re;
}

LinkBudget unit_link()
{
    LinkBudget lb;
    lb.g_e_max_db = 0.0;
    return lb;
}

} // namespace

TEST(LinkBudget, RhoAndValidation)
{
    LinkBudget lb;
    lb.p_tx_w = 2.0;
    lb.path_loss = 0.25;
    lb.shadow = 1.0;
    lb.g_e_max_db = 10.0;
    lb.noise_var = 0.5;
    EXPECT_NEAR(lb.rho(), 5.0, 1e-12);
    EXPECT_NEAR(lb.snr_scale(), 10.0, 1e-12);
    lb.noise_var = 0.0;
    EXPECT_ANY_THROW(lb.validate());
}

TEST(PathLoss, Law)
{
    EXPECT_EQ(path_loss_linear(10.0), 1.0);
    EXPECT_NEAR(path_loss_linear(60.0), std::pow(2.0, -3.76), 1e-15);
    EXPECT_ANY_THROW(path_loss_linear(-1.0));
}

TEST(Snr, Instantaneous)
{
    const LinkBudget lb = unit_link();
    EXPECT_EQ(snr_instantaneous(CVector::Zero(4), lb), 0.0);
    Rng rng(3);
    const CVector h = fdmimo::testing::random_matrix(5, 1, rng).col(0);
    LinkBudget hot = lb;
    hot.p_tx_w = 7.0;
    EXPECT_NEAR(snr_instantaneous(h, hot), 7.0 * snr_instantaneous(h, lb), 1e-12);
}

TEST(Snr, WhiteChannelChiSquareMean)
{
    const LinkBudget lb = unit_link();
    const CorrelatedChannelSampler sampler(CMatrix::Identity(64, 64));
    Rng rng(8);
    double m = 0.0;
    const int n = 10000;
    for (int t = 0; t < n; ++t)
        m += snr_instantaneous(sampler.draw(rng), lb);
    EXPECT_NEAR(m / n / (64.0 * lb.snr_scale()), 1.0, 0.02);
}

TEST(SingleUserWeights, DegenerateAndDiagonalCases)
{
    auto w = optimal_single_user_weights(make_re(CMatrix::Identity(3, 3), 3, 1));
    EXPECT_NEAR(std::abs(w.w[0](0) - cplx(1.0, 0.0)), 0.0, 1e-12);
    EXPECT_NEAR(w.w[0].tail(2).norm(), 0.0, 1e-12);

    RVector d(3);
    d << 1.0, 3.0, 1.0;
    const CMatrix diag = d.cast<cplx>().asDiagonal();
    w = optimal_single_user_weights(make_re(diag, 3, 1));
    EXPECT_NEAR(std::abs(w.w[0](1) - cplx(1.0, 0.0)), 0.0, 1e-12);
    EXPECT_NEAR(w.w[0].dot(diag * w.w[0]).real(), 3.0, 1e-12);
}

TEST(SingleUserWeights, BeatRandomSearch)
{
    const auto re = build_element_correlation(validation_spectrum(), validation_geometry(), 30);
    const auto w = optimal_single_user_weights(re);
    w.validate();
    Rng rng(21);
    for (int s = 0; s < re.geometry.n_bs; ++s) {
        const CMatrix b = re.block(s, s);
        const double best = w.w[s].dot(b * w.w[s]).real();
        const cplx first = w.w[s](0);
        EXPECT_GT(first.real(), 0.0);
        EXPECT_NEAR(first.imag(), 0.0, 1e-14);
        for (int t = 0; t < 10000; ++t) {
            const CVector u = random_unit(re.geometry.n_e, rng);
            ASSERT_LE(u.dot(b * u).real(), best + 1e-9);
        }
    }
}

TEST(Snr, DeterministicIdentities)
{
    const LinkBudget lb = unit_link();
    const auto re1 = make_re(CMatrix::Identity(6, 6), 1, 6);
    EXPECT_NEAR(snr_deterministic(re1, PortWeightMatrix::uniform(CVector::Ones(1), 6), lb), 6.0 * lb.snr_scale(),
                1e-12);

    const auto re = build_element_correlation(validation_spectrum(), validation_geometry(), 30);
    Rng rng(4);
    PortWeightMatrix w;
    for (int s = 0; s < 8; ++s)
        w.w.push_back(random_unit(10, rng));
    EXPECT_NEAR(snr_deterministic(re, w, lb), lb.snr_scale() * port_correlation(re, w).trace().real(), 1e-12);
}

TEST(Snr, RankingIsInvariantToLinkScale)
{
    const auto re = build_element_correlation(validation_spectrum(), validation_geometry(), 30);
    LinkBudget a = unit_link(), b = unit_link();
    b.p_tx_w = 1e5;
    Rng rng(12);
    std::vector<PortWeightMatrix> cands;
    for (int c = 0; c < 6; ++c)
        cands.push_back(PortWeightMatrix::uniform(downtilt_weights_3gpp(deg2rad(rng.uniform(85.0, 120.0)), re.geometry),
                                                  re.geometry.n_bs));
    for (std::size_t i = 0; i < cands.size(); ++i)
        for (std::size_t j = 0; j < cands.size(); ++j)
            EXPECT_EQ(snr_deterministic(re, cands[i], a) < snr_deterministic(re, cands[j], a),
                      snr_deterministic(re, cands[i], b) < snr_deterministic(re, cands[j], b));
}

TEST(Mrt, Normalization)
{
    CVector h(3);
    h << cplx(2.0, 0.0), 0.0, 0.0;
    const CMatrix g1 = mrt_precoder(h);
    EXPECT_NEAR(std::abs(g1(0, 0) - cplx(1.0, 0.0)), 0.0, 1e-15);
    Rng rng(5);
    const CMatrix hm = fdmimo::testing::random_matrix(8, 4, rng);
    const CMatrix g = mrt_precoder(hm);
    EXPECT_NEAR((g * g.adjoint()).trace().real(), 1.0, 1e-12);
    const double beta = g(0, 0).real() / hm(0, 0).real();
    EXPECT_LE((g - beta * hm).norm(), 1e-12);
    EXPECT_THROW(mrt_precoder(CMatrix::Zero(4, 2)), std::invalid_argument);
}

namespace {

MultiUserScene dummy_scene(int k, int n_bs)
{
    MultiUserScene sc;
    for (int i = 0; i < k; ++i) {
        sc.users.push_back(make_re(CMatrix::Identity(n_bs, n_bs), 1, n_bs));
        LinkBudget lb = unit_link();
        lb.path_loss = 1.0 / (i + 2);
        sc.links.push_back(lb);
    }
    sc.weights = PortWeightMatrix::uniform(CVector::Ones(1), n_bs);
    return sc;
}

} // namespace

TEST(Sinr, SingleUserIsSnr)
{
    const auto sc = dummy_scene(1, 5);
    Rng rng(9);
    const CMatrix h = fdmimo::testing::random_matrix(5, 1, rng);
    const CMatrix g = mrt_precoder(h);
    const double expect = std::norm(h.col(0).dot(g.col(0))) * sc.links[0].snr_scale();
    EXPECT_NEAR(sinr_instantaneous(0, h, g, sc), expect, 1e-12 * expect);
}

TEST(Sinr, OrthogonalUsersHaveNoInterference)
{
    const auto sc = dummy_scene(2, 4);
    CMatrix h = CMatrix::Zero(4, 2);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0;
    const CMatrix g = mrt_precoder(h);
    const double noise = sc.links[0].noise_var / sc.links[0].rho();
    EXPECT_NEAR(sinr_instantaneous(0, h, g, sc), std::norm(g(0, 0)) / noise, 1e-12);
}

// Written out with explicit loops instead of Eigen products.
TEST(Sinr, MatchesLoopEvaluation)
{
    const auto sc = dummy_scene(4, 6);
    Rng rng(17);
    const CMatrix h = fdmimo::testing::random_matrix(6, 4, rng);
    const CMatrix g = mrt_precoder(h);
    for (int k = 0; k < 4; ++k) {
        auto inner = [&](int a, int b) {
            cplx s = 0.0;
            for (int i = 0; i < 6; ++i)
                s += std::conj(h(i, a)) * g(i, b);
            return std::norm(s);
        };
        double interf = 0.0;
        for (int l = 0; l < 4; ++l)
            if (l != k)
                interf += inner(k, l);
        const double ref = inner(k, k) / (interf + sc.links[k].noise_var / sc.links[k].rho());
        EXPECT_NEAR(sinr_instantaneous(k, h, g, sc), ref, 1e-12 * ref);
    }
    EXPECT_ANY_THROW(sinr_instantaneous(4, h, g, sc));
}

TEST(Sir, IdenticalWhiteUsers)
{
    for (int n : {3, 8, 20}) {
        const std::vector<CMatrix> r(2, CMatrix::Identity(n, n));
        EXPECT_NEAR(sir_deterministic(0, r), double(n), 1e-12);
    }
    EXPECT_TRUE(is_interference_free(sir_deterministic(0, std::vector<CMatrix>{CMatrix::Identity(3, 3)})));
}

TEST(Sinr, DeterministicFormula)
{
    Rng rng(2);
    std::vector<CMatrix> r;
    std::vector<LinkBudget> links;
    for (int k = 0; k < 3; ++k) {
        r.push_back(fdmimo::testing::random_psd(5, rng));
        LinkBudget lb = unit_link();
        lb.path_loss = 0.1 * (k + 1);
        links.push_back(lb);
    }
    for (int k = 0; k < 3; ++k) {
        double cross = 0.0, tr = 0.0;
        for (int l = 0; l < 3; ++l) {
            tr += r[l].trace().real();
            if (l != k)
                cross += (r[k] * r[l]).trace().real();
        }
        const double num = std::pow(r[k].trace().real(), 2);
        const double noise = links[k].noise_var / links[k].rho();
        EXPECT_NEAR(sinr_deterministic(k, r, links), num / (cross + noise * tr), 1e-10 * num / cross);
        EXPECT_NEAR(sir_deterministic(k, r), num / cross, 1e-10 * num / cross);
    }
    EXPECT_NEAR(min_sir_deterministic(r), std::min({sir_deterministic(0, r), sir_deterministic(1, r), sir_deterministic(2, r)}),
                1e-15);
}

TEST(Sir, BlockwiseMatchesAssembled)
{
    Rng rng(13);
    const ArrayGeometry g = validation_geometry();
    MultiUserScene sc;
    for (int k = 0; k < 4; ++k) {
        auto s = fdmimo::testing::random_spectrum(rng);
        sc.users.push_back(build_element_correlation(s, g, 30));
        sc.links.push_back(unit_link());
    }
    for (int p = 0; p < g.n_bs; ++p)
        sc.weights.w.push_back(random_unit(g.n_e, rng));
    const auto r = sc.port_correlations();
    for (int k = 0; k < 4; ++k) {
        const double a = sir_deterministic_blockwise(k, sc);
        const double b = sir_deterministic(k, r);
        EXPECT_NEAR(a / b, 1.0, 1e-10);
        EXPECT_EQ(sir_deterministic(k, sc), b);
    }
}
