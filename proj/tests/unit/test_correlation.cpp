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
#include <sstream>
#include <vector>

#include "fdmimo/channel.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/matrix_io.hpp"
#include "test_util.hpp"

using namespace fdmimo;
using fdmimo::testing::validation_geometry;
using fdmimo::testing::validation_spectrum;

TEST(PairGeometry, Cases)
{
    const ArrayGeometry g;
    auto pg = pair_geometry(0, 0, g);
    EXPECT_EQ(pg.z_lag, 0.0);
    EXPECT_EQ(pg.beta, 0.0);
    pg = pair_geometry(1, 1, g);
    EXPECT_NEAR(pg.z_lag, 0.5 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(pg.beta, kPi / 4, 1e-15);
    pg = pair_geometry(1, -1, g);
    EXPECT_NEAR(pg.z_lag, 0.5 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(pg.beta, 3 * kPi / 4, 1e-15);
    pg = pair_geometry(2, 0, g);
    EXPECT_NEAR(pg.beta, kPi / 2, 1e-15);
    pg = pair_geometry(0, -3, g);
    EXPECT_NEAR(pg.beta, kPi, 1e-15);
}

TEST(PairGeometry, RejectsUncoveredLags)
{
    const ArrayGeometry g;
    EXPECT_THROW(pair_geometry(-1, 0, g), std::invalid_argument);
    EXPECT_THROW(pair_geometry(0, 1, g), std::invalid_argument);
    EXPECT_THROW(pair_geometry(-2, 1, g), std::invalid_argument);
}

TEST(ScfElement, ZeroLagIsMeanGain)
{
    AngularSpectrum iso = validation_spectrum();
    iso.pattern.isotropic = true;
    EXPECT_NEAR(std::abs(scf_element(0, 0, iso, validation_geometry(), 30) - cplx(1.0, 0.0)), 0.0, 1e-10);

    const auto s = validation_spectrum();
    const auto fc = fourier_coeffs(s, 4);
    const cplx r0 = scf_element(0, 0, s, validation_geometry(), 30);
    EXPECT_NEAR(r0.real(), kPi * kPi * fc.a_phi[0] * fc.b_theta[1], 1e-12);
    EXPECT_EQ(r0.imag(), 0.0);
}

TEST(ScfElement, ConjugateSymmetry)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    for (int ds = -7; ds <= 7; ++ds)
        for (int dz = -9; dz <= 9; ++dz) {
            const cplx a = scf_element(ds, dz, s, g, 30);
            const cplx b = scf_element(-ds, -dz, s, g, 30);
            EXPECT_LE(std::abs(a - std::conj(b)), 1e-12) << ds << "," << dz;
        }
}

TEST(ScfElement, AgreesWithMonteCarlo)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    Rng pick(77);
    std::vector<std::pair<int, int>> lags{{1, 0}};
    while (lags.size() < 12) {
        const int ds = static_cast<int>(pick.uniform(-7.999, 7.999));
        const int dz = static_cast<int>(pick.uniform(-9.999, 9.999));
        lags.emplace_back(ds, dz);
    }
    const auto mc = scf_element_mc_lags(lags, s, g, 100000, 12345, 2);
    int outside = 0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const cplx th = scf_element(lags[i].first, lags[i].second, s, g, 30);
        const bool ok = std::abs(th.real() - mc[i].mean.real()) <= 3 * mc[i].std_error_re + 1e-12 &&
                        std::abs(th.imag() - mc[i].mean.imag()) <= 3 * mc[i].std_error_im + 1e-12;
        outside += ok ? 0 : 1;
    }
    EXPECT_EQ(outside, 0);
}

TEST(ScfElementMc, IsotropicZeroLagIsExact)
{
    AngularSpectrum s = validation_spectrum();
    s.pattern.isotropic = true;
    const auto e = scf_element_mc(0, 0, s, validation_geometry(), 10000, 3);
    EXPECT_EQ(e.mean, cplx(1.0, 0.0));
}

TEST(ScfElementMc, DeterministicAndThreadIndependent)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    const auto a = scf_element_mc(2, -1, s, g, 20000, 9, 1);
    const auto b = scf_element_mc(2, -1, s, g, 20000, 9, 3);
    EXPECT_EQ(a.mean, b.mean);
    const auto c = scf_element_mc(2, -1, s, g, 20000, 10, 1);
    EXPECT_NE(a.mean, c.mean);
    EXPECT_LE(std::abs(a.mean - c.mean), 10.0 * std::hypot(a.std_error_re, a.std_error_im));
}

TEST(ScfElement, TruncationStability)
{
    Rng rng(31);
    const ArrayGeometry g;
    for (int t = 0; t < 4; ++t) {
        const auto s = fdmimo::testing::random_spectrum(rng);
        for (int ds = 0; ds <= 10; ++ds)
            for (int dz = -10; dz <= 10; ++dz) {
                if (!lag_in_covered_set(ds, dz) || std::hypot(0.5 * ds, 0.5 * dz) > 5.0)
                    continue;
                const cplx a = scf_element(ds, dz, s, g, 30);
                const cplx b = scf_element(ds, dz, s, g, 40);
                EXPECT_LE(std::abs(a - b), 1e-6) << ds << "," << dz;
            }
    }
}

TEST(ElementCorrelation, OneByOneIsotropic)
{
    AngularSpectrum s = validation_spectrum();
    s.pattern.isotropic = true;
    ArrayGeometry g;
    g.n_e = 1;
    g.n_bs = 1;
    const auto re = build_element_correlation(s, g, 30);
    ASSERT_EQ(re.entries.rows(), 1);
    EXPECT_NEAR(std::abs(re.entries(0, 0) - cplx(1.0, 0.0)), 0.0, 1e-10);
}

TEST(ElementCorrelation, HermitianPsdConstantDiagonal)
{
    const auto re = build_element_correlation(validation_spectrum(), validation_geometry(), 30);
    EXPECT_LE(hermitian_defect(re.entries), 1e-14);
    const auto [lo, hi] = eigen_range(re.entries);
    EXPECT_GE(lo, -1e-9 * hi);
    for (Eigen::Index i = 1; i < re.entries.rows(); ++i)
        EXPECT_EQ(re.entries(i, i), re.entries(0, 0));
}

TEST(ElementCorrelation, IndexingAndLagSymmetry)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    const auto re = build_element_correlation(s, g, 30);
    Rng rng(8);
    for (int t = 0; t < 20; ++t) {
        const int ds = static_cast<int>(rng.uniform(-7.999, 7.999));
        const int dz = static_cast<int>(rng.uniform(-9.999, 9.999));
        EXPECT_LE(std::abs(re.lag(ds, dz) - std::conj(re.lag(-ds, -dz))), 1e-12);
        EXPECT_LE(std::abs(re.lag(ds, dz) - scf_element(ds, dz, s, g, 30)), 1e-12);
    }
    // row (s', z') = (0, 0), column (s, z) = (2, 3)
    EXPECT_EQ(re.entries(0, 2 * g.n_e + 3), scf_element(2, 3, s, g, 30));
    EXPECT_EQ(re.block(1, 2)(4, 6), re.entries(g.n_e + 4, 2 * g.n_e + 6));
}

TEST(Downtilt, Examples)
{
    ArrayGeometry g;
    g.n_e = 4;
    const CVector w = downtilt_weights_3gpp(kPi / 2, g);
    for (int z = 0; z < 4; ++z)
        EXPECT_NEAR(std::abs(w(z) - cplx(0.5, 0.0)), 0.0, 1e-15);
    g.n_e = 10;
    const CVector v = downtilt_weights_3gpp(deg2rad(96.51), g);
    EXPECT_NEAR(v.norm(), 1.0, 1e-15);
    EXPECT_NEAR(std::arg(v(1) / v(0)), 0.3562, 5e-5);
    EXPECT_NEAR(std::arg(v(1) / v(0)), -2 * kPi * 0.5 * std::cos(deg2rad(96.51)), 1e-12);
}

TEST(PortWeights, Validation)
{
    PortWeightMatrix w = PortWeightMatrix::uniform(CVector::Ones(3) / std::sqrt(3.0), 4);
    EXPECT_NO_THROW(w.validate());
    w.w[2] *= 1.1;
    EXPECT_ANY_THROW(w.validate());
    const auto bd = PortWeightMatrix::uniform(CVector::Ones(2) / std::sqrt(2.0), 3).block_diagonal();
    EXPECT_EQ(bd.rows(), 6);
    EXPECT_EQ(bd.cols(), 3);
    EXPECT_EQ(bd(2, 0), cplx(0.0, 0.0));
    EXPECT_NEAR(bd(3, 1).real(), 1 / std::sqrt(2.0), 1e-15);
}

TEST(PortCorrelation, SingleElementIsIdentityMap)
{
    const auto s = validation_spectrum();
    ArrayGeometry g;
    g.n_e = 1;
    g.n_bs = 6;
    const auto re = build_element_correlation(s, g, 30);
    const auto w = PortWeightMatrix::uniform(CVector::Ones(1), 6);
    EXPECT_LE((port_correlation(re, w) - re.entries).norm(), 1e-14);
}

TEST(PortCorrelation, MatchesAssembledProductAndTraceIdentity)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    const auto re = build_element_correlation(s, g, 30);
    Rng rng(4);
    PortWeightMatrix w;
    for (int p = 0; p < g.n_bs; ++p)
        w.w.push_back(fdmimo::testing::random_unit(g.n_e, rng));
    const CMatrix wt = w.block_diagonal();
    const CMatrix rbs = port_correlation(re, w);
    EXPECT_LE((rbs - wt.adjoint() * re.entries * wt).norm(), 1e-12 * rbs.norm());
    EXPECT_LE(hermitian_defect(rbs), 1e-13);
    const auto [lo, hi] = eigen_range(rbs);
    EXPECT_GE(lo, -1e-9 * hi);
    cplx tr = 0.0;
    for (int p = 0; p < g.n_bs; ++p)
        tr += w.w[p].dot(re.block(p, p) * w.w[p]);
    EXPECT_NEAR(rbs.trace().real(), tr.real(), 1e-12);
}

// Port correlation from ray channels with 90 deg downtilt, checked entrywise against the
// sample covariance.
TEST(PortCorrelation, AgreesWithRayChannelCovariance)
{
    const auto s = validation_spectrum();
    const auto g = validation_geometry();
    const auto re = build_element_correlation(s, g, 30);
    RayChannelConfig cfg;
    cfg.spec = s;
    cfg.geom = g;
    cfg.n_paths = 1;
    cfg.weights = PortWeightMatrix::uniform(downtilt_weights_3gpp(kPi / 2, g), g.n_bs);
    const CMatrix rbs = port_correlation(re, cfg.weights).transpose();

    const int n = 100000;
    const int p = g.n_bs;
    CMatrix sum = CMatrix::Zero(p, p);
    RMatrix sq_re = RMatrix::Zero(p, p), sq_im = RMatrix::Zero(p, p);
    Rng rng(12345);
    for (int t = 0; t < n; ++t) {
        const CVector h = draw_ray_channel(cfg, rng).h;
        const CMatrix o = h * h.adjoint();
        sum += o;
        sq_re += o.real().cwiseAbs2();
        sq_im += o.imag().cwiseAbs2();
    }
    const CMatrix mean = sum / double(n);
    int outside = 0;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            const double se_re = std::sqrt((sq_re(a, b) / n - std::pow(mean(a, b).real(), 2)) / n);
            const double se_im = std::sqrt(std::max(0.0, sq_im(a, b) / n - std::pow(mean(a, b).imag(), 2)) / n);
            if (std::abs(mean(a, b).real() - rbs(a, b).real()) > 4 * se_re + 1e-12 ||
                std::abs(mean(a, b).imag() - rbs(a, b).imag()) > 4 * se_im + 1e-12)
                ++outside;
        }
    // 64 entries, a handful of excursions past 3 sigma is expected; 4 sigma should be clean
    EXPECT_LE(outside, 1);
}

TEST(PortCorrelation, AdjacentPortCorrelationFallsWithColumnLength)
{
    const auto s = validation_spectrum();
    double prev = 2.0;
    for (int ne : {2, 4, 8, 16}) {
        ArrayGeometry g;
        g.n_e = ne;
        g.n_bs = 2;
        const auto re = build_element_correlation(s, g, 30);
        const auto rbs = port_correlation(re, PortWeightMatrix::uniform(downtilt_weights_3gpp(kPi / 2, g), 2));
        const double c = std::abs(rbs(0, 1)) / rbs(0, 0).real();
        EXPECT_LT(c, prev) << ne;
        prev = c;
    }
}

TEST(PortCorrelation, RejectsDimensionMismatch)
{
    const auto re = build_element_correlation(validation_spectrum(), validation_geometry(), 30);
    EXPECT_ANY_THROW(port_correlation(re, PortWeightMatrix::uniform(CVector::Ones(3) / std::sqrt(3.0), 8)));
}

TEST(MatrixIo, RoundTrip)
{
    Rng rng(2);
    const CMatrix m = fdmimo::testing::random_matrix(5, 3, rng);
    std::stringstream ss;
    write_complex_matrix(ss, m);
    const CMatrix back = read_complex_matrix(ss);
    ASSERT_EQ(back.rows(), 5);
    ASSERT_EQ(back.cols(), 3);
    EXPECT_EQ((back - m).norm(), 0.0);
}
