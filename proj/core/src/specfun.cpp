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

#include "fdmimo/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

namespace fdmimo::specfun {

namespace {

constexpr double kPi = std::numbers::pi;

double checked_arg(double x, const char *who)
{
    if (!(std::abs(x) <= 1.0 + 1e-12))
        throw std::domain_error(std::string(who) + ": argument outside [-1, 1]");
    return std::clamp(x, -1.0, 1.0);
}

GaussRule make_gauss_rule(int n)
{
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            // p1 = P_n(x), p0 = P_{n-1}(x)
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[n - 1 - i] = x;
        r.nodes[i] = -x;
        r.weights[n - 1 - i] = w;
        r.weights[i] = w;
    }
    if (n == 1) {
        r.nodes[0] = 0.0;
        r.weights[0] = 2.0;
    }
    return r;
}

} // namespace

const GaussRule &gauss_legendre(int n)
{
    if (n < 1)
        throw std::invalid_argument("gauss_legendre: order must be positive");
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto &slot = cache[n];
    if (!slot)
        slot = std::make_unique<GaussRule>(make_gauss_rule(n));
    return *slot;
}

double integrate_composite(const std::function<double(double)> &f, double a, double b, int panels, int order)
{
    const GaussRule &g = gauss_legendre(order);
    const double h = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        double s = 0.0;
        for (int i = 0; i < order; ++i)
            s += g.weights[i] * f(mid + 0.5 * h * g.nodes[i]);
        total += 0.5 * h * s;
    }
    return total;
}

double integrate_adaptive(const std::function<double(double)> &f, double a, double b, double abs_tol,
                          int min_panels, int max_panels, int order)
{
    int panels = std::max(1, min_panels);
    double prev = integrate_composite(f, a, b, panels, order);
    while (panels < max_panels) {
        panels *= 2;
        const double cur = integrate_composite(f, a, b, panels, order);
        if (std::abs(cur - prev) <= abs_tol)
            return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate_adaptive: no convergence on [" + std::to_string(a) + ", " +
                             std::to_string(b) + "]");
}

double legendre(int n, double x)
{
    if (n < 0)
        throw std::domain_error("legendre: negative degree");
    x = checked_arg(x, "legendre");
    if (n == 0)
        return 1.0;
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

std::vector<double> legendre_all(int nmax, double x)
{
    if (nmax < 0)
        throw std::domain_error("legendre_all: negative degree");
    x = checked_arg(x, "legendre_all");
    std::vector<double> p(nmax + 1);
    p[0] = 1.0;
    if (nmax >= 1)
        p[1] = x;
    for (int k = 2; k <= nmax; ++k)
        p[k] = ((2.0 * k - 1.0) * x * p[k - 1] - (k - 1.0) * p[k - 2]) / k;
    return p;
}

std::vector<double> assoc_legendre_norm_all(int nmax, double x)
{
    if (nmax < 0)
        throw std::domain_error("assoc_legendre_norm_all: negative degree");
    x = checked_arg(x, "assoc_legendre_norm");
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    std::vector<double> t(tri_index(nmax, nmax) + 1, 0.0);
    double diag = std::sqrt(0.5);
    for (int m = 0; m <= nmax; ++m) {
        if (m > 0)
            diag *= s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
        t[tri_index(m, m)] = diag;
        if (m + 1 <= nmax)
            t[tri_index(m + 1, m)] = x * std::sqrt(2.0 * m + 3.0) * diag;
        for (int n = m + 2; n <= nmax; ++n) {
            const double nn = n, mm = m;
            const double a = std::sqrt((4.0 * nn * nn - 1.0) / (nn * nn - mm * mm));
            const double b = std::sqrt(((nn - 1.0) * (nn - 1.0) - mm * mm) / (4.0 * (nn - 1.0) * (nn - 1.0) - 1.0));
            t[tri_index(n, m)] = a * (x * t[tri_index(n - 1, m)] - b * t[tri_index(n - 2, m)]);
        }
    }
    return t;
}

double assoc_legendre_norm(int n, int m, double x)
{
    if (n < 0 || m < 0 || m > n)
        throw std::domain_error("assoc_legendre_norm: require 0 <= m <= n");
    x = checked_arg(x, "assoc_legendre_norm");
    const double s = std::sqrt(std::max(0.0, (1.0 - x) * (1.0 + x)));
    double diag = std::sqrt(0.5);
    for (int k = 1; k <= m; ++k)
        diag *= s * std::sqrt((2.0 * k + 1.0) / (2.0 * k));
    if (n == m)
        return diag;
    double p0 = diag;
    double p1 = x * std::sqrt(2.0 * m + 3.0) * diag;
    const double mm = m;
    for (int k = m + 2; k <= n; ++k) {
        const double kk = k;
        const double a = std::sqrt((4.0 * kk * kk - 1.0) / (kk * kk - mm * mm));
        const double b = std::sqrt(((kk - 1.0) * (kk - 1.0) - mm * mm) / (4.0 * (kk - 1.0) * (kk - 1.0) - 1.0));
        const double p2 = a * (x * p1 - b * p0);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

std::vector<double> spherical_bessel_all(int nmax, double x)
{
    if (nmax < 0)
        throw std::domain_error("spherical_bessel: negative order");
    if (!(x >= 0.0) || !std::isfinite(x))
        throw std::domain_error("spherical_bessel: argument must be finite and non-negative");
    std::vector<double> j(nmax + 1, 0.0);
    if (x == 0.0) {
        j[0] = 1.0;
        return j;
    }
    // Miller: unnormalized downward sweep from well above max(nmax, x)
    const int keep = std::max(nmax, 1);
    std::vector<double> w(keep + 1, 0.0);
    const int start = keep + static_cast<int>(x) + 40 + static_cast<int>(std::sqrt(40.0 * (keep + x)));
    double jp1 = 0.0;
    double jn = 1e-30;
    for (int n = start; n > 0; --n) {
        const double jm1 = (2.0 * n + 1.0) / x * jn - jp1;
        jp1 = jn;
        jn = jm1;
        if (n - 1 <= keep)
            w[n - 1] = jn;
        if (n <= keep)
            w[n] = jp1;
        if (std::abs(jn) > 1e200) {
            jn *= 1e-200;
            jp1 *= 1e-200;
            for (int k = std::max(n - 1, 0); k <= keep; ++k)
                w[k] *= 1e-200;
        }
    }
    const double j0 = std::sin(x) / x;
    const double j1 = std::sin(x) / (x * x) - std::cos(x) / x;
    const double scale = (std::abs(j0) >= std::abs(j1)) ? j0 / w[0] : j1 / w[1];
    for (int n = 0; n <= nmax; ++n)
        j[n] = w[n] * scale;
    return j;
}

double spherical_bessel(int n, double x)
{
    return spherical_bessel_all(n, x)[n];
}

// ---- TrigExpansionTable ----------------------------------------------------------

double TrigExpansionTable::coef(int l, int m, int j) const
{
    const int lmax = 2 * n0_;
    if (l < 0 || l > lmax || m < 0 || j < 0 || j > lmax)
        throw std::out_of_range("TrigExpansionTable: index out of range");
    if (m > l || j > l)
        return 0.0;
    return coef_[tri_index(l, m) * (lmax + 1) + j];
}

double TrigExpansionTable::reconstruct(int l, int m, double x) const
{
    double s = 0.0;
    for (int j = 0; j <= l; ++j) {
        const double c = coef(l, m, j);
        s += c * ((m % 2 == 0) ? std::cos(j * x) : std::sin(j * x));
    }
    return s;
}

double TrigExpansionTable::reconstruct_legendre(int l, double x) const
{
    double s = 0.0;
    for (int k = 0; k <= l; ++k)
        s += p(k) * p(l - k) * std::cos((l - 2 * k) * x);
    return s;
}

void TrigExpansionTable::write_csv(std::ostream &os) const
{
    const int lmax = 2 * n0_;
    os << "degree,order,harmonic,value\n";
    char buf[64];
    for (int n = 0; n <= lmax; ++n) {
        std::snprintf(buf, sizeof buf, "%.17g", p(n));
        os << n << ",-1,0," << buf << "\n";
    }
    for (int l = 0; l <= lmax; ++l)
        for (int m = 0; m <= l; ++m)
            for (int j = l % 2; j <= l; j += 2) {
                std::snprintf(buf, sizeof buf, "%.17g", coef(l, m, j));
                os << l << "," << m << "," << j << "," << buf << "\n";
            }
}

namespace {

struct Projection {
    std::vector<double> coef;   // same layout as the table
    std::vector<double> lead;   // cos(n x) coefficient of P_n(cos x)
};

Projection project(int lmax, int panels)
{
    constexpr int order = 16;
    const GaussRule &g = gauss_legendre(order);
    const std::size_t ntri = tri_index(lmax, lmax) + 1;
    const int nh = lmax + 1;
    Projection out;
    out.coef.assign(ntri * nh, 0.0);
    out.lead.assign(nh, 0.0);
    std::vector<double> cj(nh), sj(nh);
    const double h = kPi / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * h;
        for (int q = 0; q < order; ++q) {
            const double x = mid + 0.5 * h * g.nodes[q];
            const double w = 0.5 * h * g.weights[q];
            const double c = std::cos(x);
            const auto pbar = assoc_legendre_norm_all(lmax, c);
            const auto pl = legendre_all(lmax, c);
            for (int j = 0; j < nh; ++j) {
                cj[j] = w * std::cos(j * x);
                sj[j] = w * std::sin(j * x);
            }
            for (int l = 0; l <= lmax; ++l) {
                out.lead[l] += pl[l] * cj[l];
                for (int m = 0; m <= l; ++m) {
                    const double f = pbar[tri_index(l, m)];
                    double *row = &out.coef[tri_index(l, m) * nh];
                    const double *basis = (m % 2 == 0) ? cj.data() : sj.data();
                    for (int j = l % 2; j <= l; j += 2)
                        row[j] += f * basis[j];
                }
            }
        }
    }
    for (int l = 0; l <= lmax; ++l) {
        out.lead[l] *= (l == 0 ? 1.0 : 2.0) / kPi;
        for (int m = 0; m <= l; ++m) {
            double *row = &out.coef[tri_index(l, m) * nh];
            for (int j = 0; j < nh; ++j)
                row[j] *= (m % 2 == 0 && j == 0) ? 1.0 / kPi : 2.0 / kPi;
        }
    }
    return out;
}

double max_abs_diff(const std::vector<double> &a, const std::vector<double> &b)
{
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace

TrigExpansionTable build_trig_expansion(int max_degree)
{
    if (max_degree < 1)
        throw std::invalid_argument("build_trig_expansion: max_degree must be >= 1");
    const int lmax = 2 * max_degree;
    constexpr double tol = 1e-10;
    constexpr int max_panels = 1024;

    int panels = 4;
    Projection prev = project(lmax, panels);
    for (;;) {
        panels *= 2;
        if (panels > max_panels)
            throw std::runtime_error("build_trig_expansion: projection did not converge for degree " +
                                     std::to_string(lmax));
        Projection cur = project(lmax, panels);
        const double d = std::max(max_abs_diff(prev.coef, cur.coef), max_abs_diff(prev.lead, cur.lead));
        prev = std::move(cur);
        if (d <= tol)
            break;
    }

    TrigExpansionTable t;
    t.n0_ = max_degree;
    t.panels_ = panels;
    t.coef_ = std::move(prev.coef);
    // exact zeros for harmonics of the wrong parity
    const int nh = lmax + 1;
    for (int l = 0; l <= lmax; ++l)
        for (int m = 0; m <= l; ++m)
            for (int j = 0; j < nh; ++j)
                if ((j + l) % 2 != 0 || j > l)
                    t.coef_[tri_index(l, m) * nh + j] = 0.0;
    t.p_.resize(nh);
    t.p_[0] = 1.0;
    for (int n = 1; n <= lmax; ++n)
        t.p_[n] = 0.5 * prev.lead[n];
    for (int n = 0; n <= lmax; ++n)
        if (!(t.p_[n] > 0.0))
            throw std::runtime_error("build_trig_expansion: non-positive p_" + std::to_string(n));
    return t;
}

const TrigExpansionTable &trig_expansion(int max_degree)
{
    static std::mutex mtx;
    static std::map<int, std::unique_ptr<TrigExpansionTable>> cache;
    std::lock_guard<std::mutex> lock(mtx);
    auto &slot = cache[max_degree];
    if (!slot)
        slot = std::make_unique<TrigExpansionTable>(build_trig_expansion(max_degree));
    return *slot;
}

} // namespace fdmimo::specfun
