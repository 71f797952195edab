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

#include "fdmimo/channel.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/linalg.hpp"
#include "test_util.hpp"

using namespace fdmimo;
using fdmimo::testing::validation_geometry;
using fdmimo::testing::validation_spectrum;

TEST(ArrayResponse, Examples)
{
    const ArrayGeometry g = validation_geometry();
    EXPECT_EQ(array_response(0.7, 1.9, 1, 1, g), cplx(1.0, 0.0));
    for (int z = 1; z <= g.n_e; ++z)
        for (int s = 1; s <= g.n_bs; ++s)
            EXPECT_NEAR(std::abs(array_response(0.0, kPi / 2, z, s, g) - cplx(1.0, 0.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(array_response(kPi / 2, kPi / 2, 1, 2, g) - cplx(-1.0, 0.0)), 0.0, 1e-12);
    EXPECT_THROW(array_response(0.0, 1.0, 0, 1, g), std::out_of_range);
    EXPECT_THROW(array_response(0.0, 1.0, 1, g.n_bs + 1, g), std::out_of_range);
}

namespace {

RayChannelConfig ray_config(int n_paths, bool isotropic = false)
{
    RayChannelConfig cfg;
    cfg.spec = validation_spectrum();
    cfg.spec.pattern.isotropic = isotropic;
    cfg.geom = validation_geometry();
    cfg.n_paths = n_paths;
    cfg.weights = PortWeightMatrix::uniform(downtilt_weights_3gpp(kPi / 2, cfg.geom), cfg.geom.n_bs);
    return cfg;
}

} // namespace

TEST(RayChannel, DeterministicPerSeed)
{
    const auto cfg = ray_config(50);
    const auto a = draw_ray_channel(cfg, 99);
    const auto b = draw_ray_channel(cfg, 99);
    const auto c = draw_ray_channel(cfg, 100);
    EXPECT_EQ(a.h, b.h);
    EXPECT_NE(a.h, c.h);
    EXPECT_EQ(a.model, ChannelModel::ray);
}

// One path: h_s = alpha w^T v_s. v_s has unit-modulus entries, so Cauchy-Schwarz gives
// |w^T v_s| <= sqrt(N_E).
TEST(RayChannel, SinglePathBound)
{
    const auto cfg = ray_config(1, true);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(seed);
        const double phi = cfg.spec.azimuth.sample(rng);
        const double theta = cfg.spec.elevation.sample(rng);
        const cplx alpha = rng.complex_normal(1.0);
        const auto h = draw_ray_channel(cfg, seed).h;
        for (int s = 0; s < cfg.geom.n_bs; ++s) {
            cplx wv = 0.0;
            for (int z = 0; z < cfg.geom.n_e; ++z)
                wv += cfg.weights.w[s](z) * array_response(phi, theta, z + 1, s + 1, cfg.geom);
            EXPECT_LE(std::abs(wv), std::sqrt(double(cfg.geom.n_e)) + 1e-12);
            EXPECT_NEAR(std::abs(h(s) - alpha * wv), 0.0, 1e-12);
        }
    }
}

TEST(RayChannel, RejectsMismatchedWeights)
{
    auto cfg = ray_config(10);
    cfg.weights = PortWeightMatrix::uniform(CVector::Ones(2) / std::sqrt(2.0), cfg.geom.n_bs);
    EXPECT_ANY_THROW(draw_ray_channel(cfg, 1));
}

TEST(CorrelatedChannel, WhiteCovariance)
{
    const int p = 4, n = 100000;
    const CorrelatedChannelSampler sampler(CMatrix::Identity(p, p));
    Rng rng(6);
    CMatrix sum = CMatrix::Zero(p, p);
    for (int t = 0; t < n; ++t) {
        const CVector h = sampler.draw(rng).h;
        sum += h * h.adjoint();
    }
    const CMatrix mean = sum / double(n);
    // diagonal |h|^2 ~ Exp(1): se 1/sqrt(n); off-diagonal parts have variance 1/2
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            const double se = a == b ? 1.0 / std::sqrt(n) : std::sqrt(0.5 / n);
            EXPECT_LE(std::abs(mean(a, b).real() - (a == b ? 1.0 : 0.0)), 3 * se);
            EXPECT_LE(std::abs(mean(a, b).imag()), 3 * se);
        }
}

TEST(CorrelatedChannel, RankOneRange)
{
    Rng rng(1);
    const CVector u = fdmimo::testing::random_unit(6, rng);
    const CMatrix r = 2.0 * u * u.adjoint();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const CVector h = draw_correlated_channel(r, seed).h;
        const cplx c = u.dot(h);
        // the square root of rounding-level eigenvalues leaves ~sqrt(eps) off the range
        EXPECT_LE((h - c * u).norm(), 1e-7 * h.norm());
    }
}

TEST(CorrelatedChannel, SampleCovarianceMatchesTarget)
{
    const auto g = validation_geometry();
    const auto re = build_element_correlation(validation_spectrum(), g, 30);
    const CMatrix rbs = port_correlation(re, PortWeightMatrix::uniform(downtilt_weights_3gpp(kPi / 2, g), g.n_bs));
    const CorrelatedChannelSampler sampler(rbs);
    const int n = 100000, p = g.n_bs;
    Rng rng(44);
    CMatrix sum = CMatrix::Zero(p, p);
    for (int t = 0; t < n; ++t) {
        const CVector h = sampler.draw(rng).h;
        sum += h * h.adjoint();
    }
    const CMatrix mean = sum / double(n);
    int outside = 0;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            // Gaussian fourth moments: var Re(h_a h_b^*) = (R_aa R_bb + Re(R_ab)^2 - Im(R_ab)^2) / 2
            const double raa = rbs(a, a).real(), rbb = rbs(b, b).real();
            const cplx rab = rbs(a, b);
            const double v_re = 0.5 * (raa * rbb + rab.real() * rab.real() - rab.imag() * rab.imag());
            const double v_im = 0.5 * (raa * rbb - rab.real() * rab.real() + rab.imag() * rab.imag());
            if (std::abs(mean(a, b).real() - rab.real()) > 3 * std::sqrt(v_re / n) + 1e-15 ||
                std::abs(mean(a, b).imag() - rab.imag()) > 3 * std::sqrt(v_im / n) + 1e-15)
                ++outside;
        }
    EXPECT_LE(outside, 2); // 128 components at 3 sigma
}

TEST(CorrelatedChannel, RejectsNonHermitian)
{
    CMatrix r = CMatrix::Identity(3, 3);
    r(0, 1) = 0.5;
    EXPECT_THROW(CorrelatedChannelSampler{r}, std::invalid_argument);
}

TEST(ChannelModels, RayAndCorrelatedPortPowersAgree)
{
    auto cfg = ray_config(200);
    cfg.geom.n_bs = 4;
    cfg.weights = PortWeightMatrix::uniform(downtilt_weights_3gpp(deg2rad(100.0), cfg.geom), 4);
    const auto re = build_element_correlation(cfg.spec, cfg.geom, 30);
    const CorrelatedChannelSampler sampler(port_correlation(re, cfg.weights));
    const int n = 20000;
    RVector ray = RVector::Zero(4), cor = RVector::Zero(4);
    Rng a(5), b(6);
    for (int t = 0; t < n; ++t) {
        ray += draw_ray_channel(cfg, a).h.cwiseAbs2();
        cor += sampler.draw(b).h.cwiseAbs2();
    }
    for (int s = 0; s < 4; ++s)
        EXPECT_NEAR(ray(s) / cor(s), 1.0, 0.05) << s;
}

// (1/N) h^H h concentrates at rate 1/sqrt(N).
TEST(ChannelModels, TraceLemmaConcentration)
{
    AngularSpectrum s = validation_spectrum();
    s.azimuth.mean = 0.0;
    s.azimuth.kappa = 2.0;
    std::vector<double> sd;
    for (int nb : {20, 40, 80}) {
        ArrayGeometry g;
        g.n_e = 4;
        g.n_bs = nb;
        const auto re = build_element_correlation(s, g, 30);
        const CorrelatedChannelSampler sampler(
            port_correlation(re, PortWeightMatrix::uniform(downtilt_weights_3gpp(kPi / 2, g), nb)));
        Rng rng(100 + nb);
        const int n = 1000;
        double m = 0.0, m2 = 0.0;
        for (int t = 0; t < n; ++t) {
            const double x = sampler.draw(rng).h.squaredNorm() / nb;
            m += x;
            m2 += x * x;
        }
        m /= n;
        sd.push_back(std::sqrt(m2 / n - m * m));
    }
    for (int i = 0; i + 1 < 3; ++i) {
        const double ratio = sd[i + 1] / sd[i];
        EXPECT_GE(ratio, 0.6);
        EXPECT_LE(ratio, 0.85);
    }
}
