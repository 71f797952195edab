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

#include "fdmimo/correlation.hpp"
#include "fdmimo/matrix_io.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "fdmimo/linalg.hpp"
#include "fdmimo/parallel.hpp"
#include "fdmimo/rng.hpp"
#include "fdmimo/specfun.hpp"

namespace fdmimo {

void ArrayGeometry::validate() const
{
    if (n_e < 1 || n_bs < 1)
        throw std::invalid_argument("ArrayGeometry: n_e and n_bs must be >= 1");
    if (!(d_y_lambda > 0.0) || !(d_z_lambda > 0.0))
        throw std::invalid_argument("ArrayGeometry: spacings must be positive");
}

bool lag_in_covered_set(int ds, int dz)
{
    return (ds == 0 && dz == 0) || (ds > 0 && dz >= 0) || (ds >= 0 && dz < 0);
}

PairGeometry pair_geometry(int ds, int dz, const ArrayGeometry &geom)
{
    if (!lag_in_covered_set(ds, dz))
        throw std::invalid_argument("pair_geometry: lag (" + std::to_string(ds) + ", " + std::to_string(dz) +
                                    ") is outside the covered set; use the conjugate of the negated lag");
    const double zy = ds * geom.d_y_lambda;
    const double zz = dz * geom.d_z_lambda;
    PairGeometry pg;
    pg.z_lag = std::hypot(zy, zz);
    if (ds == 0 && dz == 0)
        pg.beta = 0.0;
    else if (dz > 0)
        pg.beta = std::atan(zy / zz);
    else if (dz == 0)
        pg.beta = kPi / 2;
    else
        pg.beta = kPi + std::atan(zy / zz);
    return pg;
}

// ---- closed form ----------------------------------------------------------------

ScfEvaluator::ScfEvaluator(const AngularSpectrum &spec, int n0) : n0_(n0)
{
    if (n0 < 1)
        throw std::invalid_argument("ScfEvaluator: n0 must be >= 1");
    fold(fourier_coeffs(spec, 2 * n0 + 1));
}

ScfEvaluator::ScfEvaluator(const FourierCoefficients &fc, int n0) : n0_(n0)
{
    if (n0 < 1)
        throw std::invalid_argument("ScfEvaluator: n0 must be >= 1");
    fold(fc);
}

void ScfEvaluator::fold(const FourierCoefficients &fc)
{
    const int n0 = n0_;
    if (fc.max_harmonic() < 2 * n0 + 1)
        throw std::invalid_argument("ScfEvaluator: Fourier coefficients needed up to harmonic " +
                                    std::to_string(2 * n0 + 1));
    const auto &tt = specfun::trig_expansion(n0);
    const double pi2 = kPi * kPi;
    const double a0 = fc.a_phi[0];
    const auto &cd = fc.cos_diff; // b(j+1) - b(j-1)
    const auto &sd = fc.sin_diff; // a(j-1) - a(j+1)

    zero_ = pi2 * a0 * fc.b_theta[1];
    const std::size_t stride = n0 + 1;
    leg_even_.assign(stride, 0.0);
    leg_odd_.assign(stride, 0.0);
    c_even_.assign(stride * stride, 0.0);
    d_even_.assign(stride * stride, 0.0);
    c_odd_.assign(stride * stride, 0.0);
    d_odd_.assign(stride * stride, 0.0);

    for (int n = 1; n <= n0; ++n) {
        // k from -n to n, the pair (k, -k) folded together
        double se = 0.5 * tt.p(n) * tt.p(n) * cd[0];
        for (int k = 1; k <= n; ++k)
            se += tt.p(n - k) * tt.p(n + k) * cd[2 * k];
        leg_even_[n] = pi2 * a0 * se;

        double so = 0.0;
        for (int k = 1; k <= n; ++k)
            so += tt.p(n - k) * tt.p(n + k - 1) * cd[2 * k - 1];
        leg_odd_[n] = pi2 * a0 * so;

        for (int m = 1; m <= n; ++m) {
            const std::size_t idx = n * stride + m;
            double ce = 0.0, de = 0.0, co = 0.0, dodd = 0.0;
            for (int k = 0; k <= n; ++k)
                ce += tt.c_even(n, m, k) * cd[2 * k];
            for (int k = 1; k <= n; ++k) {
                de += tt.d_even(n, m, k) * sd[2 * k];
                dodd += tt.d_odd(n, m, k) * sd[2 * k - 1];
                co += tt.c_odd(n, m, k) * cd[2 * k - 1];
            }
            c_even_[idx] = 0.5 * pi2 * fc.a_phi[2 * m] * ce;
            d_even_[idx] = 0.5 * pi2 * fc.b_phi[2 * m - 1] * de;
            c_odd_[idx] = 0.5 * pi2 * fc.a_phi[2 * m] * co;
            d_odd_[idx] = 0.5 * pi2 * fc.b_phi[2 * m - 1] * dodd;
        }
    }
}

cplx ScfEvaluator::evaluate(const PairGeometry &pg) const
{
    const int n0 = n0_;
    const int lmax = 2 * n0;
    const double x = 2.0 * kPi * pg.z_lag;
    if (x == 0.0)
        return {zero_, 0.0};
    const double cb = std::cos(pg.beta);
    const auto jb = specfun::spherical_bessel_all(lmax, x);
    const auto pl = specfun::legendre_all(lmax, cb);
    const auto pbar = specfun::assoc_legendre_norm_all(lmax, cb);
    const std::size_t stride = n0 + 1;

    double re = zero_ * jb[0];
    double im = 0.0;
    for (int n = 1; n <= n0; ++n) {
        const double sgn_n = (n % 2 == 0) ? 1.0 : -1.0;
        const int le = 2 * n, lo = 2 * n - 1;
        re += sgn_n * (4.0 * n + 1.0) * jb[le] * pl[le] * leg_even_[n];
        im -= sgn_n * (4.0 * n - 1.0) * jb[lo] * pl[lo] * leg_odd_[n];

        double even_assoc = 0.0, odd_assoc = 0.0;
        for (int m = 1; m <= n; ++m) {
            const double sgn_m = (m % 2 == 0) ? 1.0 : -1.0;
            const std::size_t idx = n * stride + m;
            even_assoc += sgn_m * (pbar[specfun::tri_index(le, 2 * m)] * c_even_[idx] -
                                   pbar[specfun::tri_index(le, 2 * m - 1)] * d_even_[idx]);
            const double p_odd_even_order = (2 * m <= lo) ? pbar[specfun::tri_index(lo, 2 * m)] : 0.0;
            odd_assoc += sgn_m * (pbar[specfun::tri_index(lo, 2 * m - 1)] * d_odd_[idx] -
                                  p_odd_even_order * c_odd_[idx]);
        }
        re += 4.0 * sgn_n * jb[le] * even_assoc;
        im += 4.0 * sgn_n * jb[lo] * odd_assoc;
    }
    return {re, im};
}

cplx ScfEvaluator::at_lag(int ds, int dz, const ArrayGeometry &geom) const
{
    if (lag_in_covered_set(ds, dz))
        return evaluate(pair_geometry(ds, dz, geom));
    return std::conj(evaluate(pair_geometry(-ds, -dz, geom)));
}

// ---- memo -------------------------------------------------------------------------

namespace {

using SpecKey = std::tuple<double, double, double, double, double, double, double, double, double, bool, int>;
using GeomKey = std::tuple<int, int, double, double>;

SpecKey spec_key(const AngularSpectrum &s, int n0)
{
    return {s.elevation.mean,      s.elevation.spread,      s.azimuth.mean,  s.azimuth.kappa,
            s.pattern.phi_3db_deg, s.pattern.theta_3db_deg, s.pattern.a_m_db, s.pattern.sla_v_db,
            s.pattern.g_e_max_dbi, s.pattern.isotropic,     n0};
}

GeomKey geom_key(const ArrayGeometry &g)
{
    return {g.n_e, g.n_bs, g.d_y_lambda, g.d_z_lambda};
}

constexpr std::size_t kMaxCacheEntries = 4096;

std::mutex &memo_mutex()
{
    static std::mutex m;
    return m;
}

std::map<SpecKey, std::shared_ptr<const ScfEvaluator>> &evaluator_cache()
{
    static std::map<SpecKey, std::shared_ptr<const ScfEvaluator>> c;
    return c;
}

std::map<std::pair<SpecKey, GeomKey>, std::shared_ptr<const LagTable>> &lag_cache()
{
    static std::map<std::pair<SpecKey, GeomKey>, std::shared_ptr<const LagTable>> c;
    return c;
}

} // namespace

std::shared_ptr<const ScfEvaluator> scf_evaluator(const AngularSpectrum &spec, int n0)
{
    const SpecKey key = spec_key(spec, n0);
    {
        std::lock_guard<std::mutex> lock(memo_mutex());
        auto it = evaluator_cache().find(key);
        if (it != evaluator_cache().end())
            return it->second;
    }
    auto ev = std::make_shared<const ScfEvaluator>(spec, n0);
    std::lock_guard<std::mutex> lock(memo_mutex());
    auto &cache = evaluator_cache();
    if (cache.size() >= kMaxCacheEntries)
        cache.clear();
    return cache.emplace(key, ev).first->second;
}

std::size_t scf_cache_size()
{
    std::lock_guard<std::mutex> lock(memo_mutex());
    return evaluator_cache().size() + lag_cache().size();
}

void clear_scf_caches()
{
    std::lock_guard<std::mutex> lock(memo_mutex());
    evaluator_cache().clear();
    lag_cache().clear();
}

cplx scf_element(int ds, int dz, const AngularSpectrum &spec, const ArrayGeometry &geom, int n0)
{
    return scf_evaluator(spec, n0)->at_lag(ds, dz, geom);
}

cplx LagTable::at(int ds, int dz) const
{
    const int ne = geometry.n_e, nb = geometry.n_bs;
    if (std::abs(ds) >= nb || std::abs(dz) >= ne)
        throw std::out_of_range("LagTable: lag outside the array");
    return values[static_cast<std::size_t>((ds + nb - 1) * (2 * ne - 1) + dz + ne - 1)];
}

std::shared_ptr<const LagTable> scf_lag_table(const AngularSpectrum &spec, const ArrayGeometry &geom, int n0)
{
    geom.validate();
    const auto key = std::make_pair(spec_key(spec, n0), geom_key(geom));
    {
        std::lock_guard<std::mutex> lock(memo_mutex());
        auto it = lag_cache().find(key);
        if (it != lag_cache().end())
            return it->second;
    }
    const auto ev = scf_evaluator(spec, n0);
    auto table = std::make_shared<LagTable>();
    table->geometry = geom;
    const int ne = geom.n_e, nb = geom.n_bs;
    table->values.resize(static_cast<std::size_t>((2 * nb - 1) * (2 * ne - 1)));
    // covered lags first, the rest by conjugate symmetry
    for (int ds = -(nb - 1); ds <= nb - 1; ++ds)
        for (int dz = -(ne - 1); dz <= ne - 1; ++dz)
            if (lag_in_covered_set(ds, dz))
                table->values[(ds + nb - 1) * (2 * ne - 1) + dz + ne - 1] =
                    ev->evaluate(pair_geometry(ds, dz, geom));
    for (int ds = -(nb - 1); ds <= nb - 1; ++ds)
        for (int dz = -(ne - 1); dz <= ne - 1; ++dz)
            if (!lag_in_covered_set(ds, dz))
                table->values[(ds + nb - 1) * (2 * ne - 1) + dz + ne - 1] =
                    std::conj(table->values[(-ds + nb - 1) * (2 * ne - 1) - dz + ne - 1]);
    std::lock_guard<std::mutex> lock(memo_mutex());
    auto &cache = lag_cache();
    if (cache.size() >= kMaxCacheEntries)
        cache.clear();
    return cache.emplace(key, std::move(table)).first->second;
}

// ---- Monte Carlo ------------------------------------------------------------------

std::vector<McEstimate> scf_element_mc_lags(const std::vector<std::pair<int, int>> &lags,
                                            const AngularSpectrum &spec, const ArrayGeometry &geom,
                                            std::int64_t n_samples, std::uint64_t seed, int threads)
{
    if (n_samples < 1)
        throw std::invalid_argument("scf_element_mc: n_samples must be >= 1");
    spec.validate();
    const std::size_t nl = lags.size();
    const std::int64_t n_blocks = (n_samples + mc_block_size - 1) / mc_block_size;
    // per block: sum re, sum im, sum re^2, sum im^2 for every lag
    std::vector<std::vector<double>> partial(static_cast<std::size_t>(n_blocks));
    const Rng root(seed);

    parallel_for(n_blocks, threads, [&](std::int64_t b) {
        Rng rng = root.substream(static_cast<std::uint64_t>(b));
        const std::int64_t count = std::min<std::int64_t>(mc_block_size, n_samples - b * mc_block_size);
        std::vector<double> acc(4 * nl, 0.0);
        for (std::int64_t i = 0; i < count; ++i) {
            const double phi = spec.azimuth.sample(rng);
            const double theta = spec.elevation.sample(rng);
            const double g = element_field_linear(phi, theta, spec.pattern);
            const double u = geom.d_y_lambda * std::sin(phi) * std::sin(theta);
            const double v = geom.d_z_lambda * std::cos(theta);
            for (std::size_t l = 0; l < nl; ++l) {
                const double ph = 2.0 * kPi * (lags[l].first * u + lags[l].second * v);
                const double re = g * std::cos(ph);
                const double im = g * std::sin(ph);
                acc[4 * l] += re;
                acc[4 * l + 1] += im;
                acc[4 * l + 2] += re * re;
                acc[4 * l + 3] += im * im;
            }
        }
        partial[static_cast<std::size_t>(b)] = std::move(acc);
    });

    std::vector<double> tot(4 * nl, 0.0);
    for (const auto &p : partial)
        for (std::size_t i = 0; i < tot.size(); ++i)
            tot[i] += p[i];

    std::vector<McEstimate> out(nl);
    const double n = static_cast<double>(n_samples);
    for (std::size_t l = 0; l < nl; ++l) {
        const double mr = tot[4 * l] / n, mi = tot[4 * l + 1] / n;
        const double denom = n > 1 ? n - 1.0 : 1.0;
        const double vr = std::max(0.0, (tot[4 * l + 2] - n * mr * mr) / denom);
        const double vi = std::max(0.0, (tot[4 * l + 3] - n * mi * mi) / denom);
        out[l].mean = {mr, mi};
        out[l].std_error_re = std::sqrt(vr / n);
        out[l].std_error_im = std::sqrt(vi / n);
        out[l].n = n_samples;
    }
    return out;
}

McEstimate scf_element_mc(int ds, int dz, const AngularSpectrum &spec, const ArrayGeometry &geom,
                          std::int64_t n_samples, std::uint64_t seed, int threads)
{
    return scf_element_mc_lags({{ds, dz}}, spec, geom, n_samples, seed, threads).front();
}

// ---- matrices -----------------------------------------------------------------------

CMatrix ElementCorrelationMatrix::block(int s, int t) const
{
    const int ne = geometry.n_e;
    return entries.block(static_cast<Eigen::Index>(s) * ne, static_cast<Eigen::Index>(t) * ne, ne, ne);
}

cplx ElementCorrelationMatrix::lag(int ds, int dz) const
{
    const int ne = geometry.n_e, nb = geometry.n_bs;
    if (std::abs(ds) >= nb || std::abs(dz) >= ne)
        throw std::out_of_range("ElementCorrelationMatrix: lag outside the array");
    // row port 0 / element 0 when the lag is non-negative, otherwise shift the row
    const int s_row = ds >= 0 ? 0 : -ds;
    const int z_row = dz >= 0 ? 0 : -dz;
    return entries(s_row * ne + z_row, (s_row + ds) * ne + z_row + dz);
}

ElementCorrelationMatrix element_correlation_from_lags(const LagTable &table)
{
    const ArrayGeometry &g = table.geometry;
    const int ne = g.n_e, nb = g.n_bs;
    ElementCorrelationMatrix re;
    re.geometry = g;
    re.entries.resize(g.size(), g.size());
    for (int sr = 0; sr < nb; ++sr)
        for (int zr = 0; zr < ne; ++zr)
            for (int sc = 0; sc < nb; ++sc)
                for (int zc = 0; zc < ne; ++zc)
                    re.entries(sr * ne + zr, sc * ne + zc) = table.at(sc - sr, zc - zr);
    return re;
}

void check_element_correlation(const ElementCorrelationMatrix &re)
{
    const double scale = std::max(1.0, re.entries.cwiseAbs().maxCoeff());
    if (hermitian_defect(re.entries) > 1e-12 * scale)
        throw std::runtime_error("element correlation matrix is not Hermitian");
    const auto [lmin, lmax] = eigen_range(re.entries);
    if (lmin < -1e-9 * std::max(lmax, 0.0))
        throw std::runtime_error("element correlation matrix is not positive semi-definite: min eigenvalue " +
                                 format_double(lmin) + ", max eigenvalue " + format_double(lmax) +
                                 " (raise the series order n0)");
}

ElementCorrelationMatrix build_element_correlation(const AngularSpectrum &spec, const ArrayGeometry &geom, int n0,
                                                   bool check_psd)
{
    auto re = element_correlation_from_lags(*scf_lag_table(spec, geom, n0));
    if (check_psd)
        check_element_correlation(re);
    return re;
}

CVector downtilt_weights_3gpp(double theta_tilt, const ArrayGeometry &geom)
{
    if (!(theta_tilt > 0.0 && theta_tilt < kPi))
        throw std::invalid_argument("downtilt_weights_3gpp: tilt must lie in (0, pi)");
    CVector w(geom.n_e);
    const double inv = 1.0 / std::sqrt(static_cast<double>(geom.n_e));
    const double c = std::cos(theta_tilt);
    for (int z = 0; z < geom.n_e; ++z)
        w(z) = inv * std::polar(1.0, -2.0 * kPi * z * geom.d_z_lambda * c);
    return w;
}

PortWeightMatrix PortWeightMatrix::uniform(const CVector &v, int n_bs)
{
    PortWeightMatrix p;
    p.w.assign(static_cast<std::size_t>(n_bs), v);
    return p;
}

void PortWeightMatrix::validate(double tol) const
{
    if (w.empty())
        throw std::invalid_argument("PortWeightMatrix: no ports");
    const auto ne = w.front().size();
    for (std::size_t s = 0; s < w.size(); ++s) {
        if (w[s].size() != ne)
            throw std::invalid_argument("PortWeightMatrix: inconsistent vector lengths");
        if (std::abs(w[s].norm() - 1.0) > tol)
            throw std::invalid_argument("PortWeightMatrix: weight vector " + std::to_string(s) + " is not unit norm");
    }
}

CMatrix PortWeightMatrix::block_diagonal() const
{
    const int nb = n_bs(), ne = n_e();
    CMatrix m = CMatrix::Zero(static_cast<Eigen::Index>(nb) * ne, nb);
    for (int s = 0; s < nb; ++s)
        m.block(static_cast<Eigen::Index>(s) * ne, s, ne, 1) = w[s];
    return m;
}

CMatrix port_correlation(const ElementCorrelationMatrix &re, const PortWeightMatrix &w)
{
    const int nb = re.geometry.n_bs, ne = re.geometry.n_e;
    if (w.n_bs() != nb || w.n_e() != ne)
        throw std::invalid_argument("port_correlation: dimension mismatch between weights and geometry");
    CMatrix r(nb, nb);
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b)
            r(a, b) = w.w[a].dot(re.block(a, b) * w.w[b]); // dot conjugates the first argument
    return r;
}

} // namespace fdmimo
