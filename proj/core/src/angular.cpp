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

#include "fdmimo/angular.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fdmimo/specfun.hpp"

namespace fdmimo {

namespace {
const double kLn10 = std::log(10.0);
}

void ElementPattern::validate() const
{
    if (!(phi_3db_deg > 0.0) || !(theta_3db_deg > 0.0))
        throw std::invalid_argument("ElementPattern: half-power beamwidths must be positive");
    if (!(a_m_db >= 0.0) || !(sla_v_db >= 0.0))
        throw std::invalid_argument("ElementPattern: attenuation limits must be non-negative");
}

double wrap_angle(double a)
{
    double r = std::remainder(a, 2.0 * kPi); // [-pi, pi]
    if (r <= -kPi)
        r += 2.0 * kPi;
    return r;
}

double horizontal_attenuation_db(double phi, const ElementPattern &p)
{
    if (p.isotropic)
        return 0.0;
    const double r = rad2deg(wrap_angle(phi)) / p.phi_3db_deg;
    return -std::min(12.0 * r * r, p.a_m_db);
}

double vertical_attenuation_db(double theta, const ElementPattern &p)
{
    if (p.isotropic)
        return 0.0;
    const double r = (rad2deg(theta) - 90.0) / p.theta_3db_deg;
    return -std::min(12.0 * r * r, p.sla_v_db);
}

double element_gain_db(double phi, double theta, const ElementPattern &p)
{
    if (p.isotropic)
        return 0.0;
    const double att = -(horizontal_attenuation_db(phi, p) + vertical_attenuation_db(theta, p));
    return p.g_e_max_dbi - std::min(att, p.a_m_db);
}

double horizontal_field(double phi, const ElementPattern &p)
{
    if (p.isotropic)
        return 1.0;
    const double r = rad2deg(wrap_angle(phi)) / p.phi_3db_deg;
    return std::exp(-1.2 * r * r * kLn10);
}

double vertical_field(double theta, const ElementPattern &p)
{
    if (p.isotropic)
        return 1.0;
    const double r = (rad2deg(theta) - 90.0) / p.theta_3db_deg;
    return std::exp(-1.2 * r * r * kLn10);
}

double element_field_linear(double phi, double theta, const ElementPattern &p)
{
    return horizontal_field(phi, p) * vertical_field(theta, p);
}

// ---- elevation ---------------------------------------------------------------

void ElevationLaplacian::validate() const
{
    if (!(mean > 0.0 && mean < kPi))
        throw std::invalid_argument("ElevationLaplacian: mean must lie in (0, pi)");
    if (!(spread > 0.0))
        throw std::invalid_argument("ElevationLaplacian: spread must be positive");
}

double ElevationLaplacian::normalizer() const
{
    const double a = std::sqrt(2.0) / spread;
    return (-std::expm1(-a * mean) - std::expm1(-a * (kPi - mean))) / a;
}

double ElevationLaplacian::pdf(double theta) const
{
    if (theta < 0.0 || theta > kPi)
        return 0.0;
    const double a = std::sqrt(2.0) / spread;
    return std::exp(-a * std::abs(theta - mean)) / normalizer();
}

double ElevationLaplacian::sample(Rng &rng) const
{
    const double a = std::sqrt(2.0) / spread;
    const double left = -std::expm1(-a * mean) / a;
    const double right = -std::expm1(-a * (kPi - mean)) / a;
    const double uz = rng.uniform() * (left + right);
    double t;
    if (uz < left)
        t = mean + std::log(a * uz + std::exp(-a * mean)) / a;
    else
        t = mean - std::log1p(-a * (uz - left)) / a;
    return std::clamp(t, 0.0, kPi);
}

// ---- azimuth -----------------------------------------------------------------

void AzimuthVonMises::validate() const
{
    if (!(kappa >= 0.0) || !std::isfinite(kappa))
        throw std::invalid_argument("AzimuthVonMises: kappa must be finite and non-negative");
    if (!std::isfinite(mean))
        throw std::invalid_argument("AzimuthVonMises: mean must be finite");
}

double AzimuthVonMises::pdf(double phi) const
{
    if (kappa == 0.0)
        return 1.0 / (2.0 * kPi);
    // scaled form avoids overflow of I0 for large kappa
    const double i0e = std::cyl_bessel_i(0.0, kappa) * std::exp(-kappa);
    return std::exp(kappa * (std::cos(phi - mean) - 1.0)) / (2.0 * kPi * i0e);
}

double AzimuthVonMises::sample(Rng &rng) const
{
    if (kappa < 1e-8)
        return wrap_angle(kPi * (2.0 * rng.uniform() - 1.0));
    // Best and Fisher rejection sampler
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double r = (1.0 + rho * rho) / (2.0 * rho);
    double f;
    for (;;) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double z = std::cos(kPi * u1);
        f = (1.0 + r * z) / (r + z);
        const double c = kappa * (r - f);
        if (c * (2.0 - c) - u2 > 0.0)
            break;
        if (std::log(c / u2) + 1.0 - c >= 0.0)
            break;
    }
    const double u3 = rng.uniform();
    const double dev = std::acos(std::clamp(f, -1.0, 1.0));
    return wrap_angle(mean + (u3 > 0.5 ? dev : -dev));
}

void AngularSpectrum::validate() const
{
    elevation.validate();
    azimuth.validate();
    pattern.validate();
}

// ---- Fourier coefficients ----------------------------------------------------

double FourierCoefficients::a_theta_ext(int k) const
{
    return a_theta.at(static_cast<std::size_t>(std::abs(k)));
}

double FourierCoefficients::b_theta_ext(int k) const
{
    const double v = b_theta.at(static_cast<std::size_t>(std::abs(k)));
    return k < 0 ? -v : v;
}

SpectrumWeights spectrum_weights(const AngularSpectrum &spec)
{
    spec.validate();
    SpectrumWeights w;
    const AngularSpectrum s = spec;
    w.azimuth = [s](double phi) { return horizontal_field(phi, s.pattern) * s.azimuth.pdf(phi); };
    w.elevation = [s](double theta) { return vertical_field(theta, s.pattern) * s.elevation.pdf(theta); };
    w.azimuth_breaks = {0.0, wrap_angle(s.azimuth.mean)};
    w.elevation_breaks = {s.elevation.mean, kPi / 2};
    return w;
}

namespace {

// Composite Gauss-Legendre nodes over a segmented interval, one refinement level per panel count.
class PanelLevels {
public:
    PanelLevels(std::function<double(double)> f, double a, double b, std::vector<double> breaks)
        : f_(std::move(f))
    {
        edges_.push_back(a);
        std::sort(breaks.begin(), breaks.end());
        for (double x : breaks)
            if (x > a + 1e-9 && x < b - 1e-9 && std::abs(x - edges_.back()) > 1e-9)
                edges_.push_back(x);
        edges_.push_back(b);
    }

    struct Level {
        std::vector<double> x;
        std::vector<double> wf; // quadrature weight times integrand weight
    };

    const Level &level(int index)
    {
        while (static_cast<int>(levels_.size()) <= index)
            levels_.push_back(build(kFirstPanels << levels_.size()));
        return levels_[index];
    }

    static constexpr int kFirstPanels = 4;
    static constexpr int kMaxLevels = 11;

    Level build(int panels) const
    {
        constexpr int order = 16;
        const auto &g = specfun::gauss_legendre(order);
        Level lv;
        for (std::size_t s = 0; s + 1 < edges_.size(); ++s) {
            const double a = edges_[s], b = edges_[s + 1];
            const double h = (b - a) / panels;
            for (int p = 0; p < panels; ++p) {
                const double mid = a + (p + 0.5) * h;
                for (int q = 0; q < order; ++q) {
                    const double x = mid + 0.5 * h * g.nodes[q];
                    lv.x.push_back(x);
                    lv.wf.push_back(0.5 * h * g.weights[q] * f_(x));
                }
            }
        }
        return lv;
    }

    template <class Basis>
    double integrate(Basis basis, double tol, const char *what, int index)
    {
        double prev = sum(level(0), basis);
        for (int l = 1; l < kMaxLevels; ++l) {
            const double cur = sum(level(l), basis);
            if (std::abs(cur - prev) <= tol)
                return cur;
            prev = cur;
        }
        throw std::runtime_error(std::string("fourier_coeffs: quadrature did not converge for ") + what + "(" +
                                 std::to_string(index) + ")");
    }

private:
    template <class Basis>
    static double sum(const Level &lv, Basis basis)
    {
        double s = 0.0;
        for (std::size_t i = 0; i < lv.x.size(); ++i)
            s += lv.wf[i] * basis(lv.x[i]);
        return s;
    }

    std::function<double(double)> f_;
    std::vector<double> edges_;
    std::vector<Level> levels_;
};

// sin(k x) / sin(x) = U_{k-1}(cos x), evaluated by the Chebyshev recurrence
double sin_ratio(int k, double x)
{
    if (k == 0)
        return 0.0;
    const double c = std::cos(x);
    double u0 = 1.0, u1 = 2.0 * c;
    if (k == 1)
        return u0;
    for (int n = 2; n < k; ++n) {
        const double u2 = 2.0 * c * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    return u1;
}

} // namespace

FourierCoefficients fourier_coeffs(const SpectrumWeights &w, int max_harmonic)
{
    if (max_harmonic < 1)
        throw std::invalid_argument("fourier_coeffs: max_harmonic must be >= 1");
    constexpr double tol = 1e-12;
    const double inv_pi = 1.0 / kPi;

    PanelLevels az(w.azimuth, -kPi, kPi, w.azimuth_breaks);
    PanelLevels el(w.elevation, 0.0, kPi, w.elevation_breaks);

    FourierCoefficients fc;
    const int n = max_harmonic + 1;
    fc.a_phi.assign(n, 0.0);
    fc.b_phi.assign(n, 0.0);
    fc.a_theta.assign(n, 0.0);
    fc.b_theta.assign(n, 0.0);
    fc.cos_diff.assign(n - 1, 0.0);
    fc.sin_diff.assign(n - 1, 0.0);

    for (int m = 0; m < n; ++m) {
        fc.a_phi[m] = inv_pi * az.integrate([m](double x) { return std::cos(m * x); }, tol, "a_phi", m);
        if (m > 0)
            fc.b_phi[m] = inv_pi * az.integrate([m](double x) { return std::sin(m * x); }, tol, "b_phi", m);
    }
    for (int k = 1; k < n; ++k)
        fc.b_theta[k] = inv_pi * el.integrate([k](double x) { return sin_ratio(k, x); }, tol, "b_theta", k);
    for (int j = 0; j + 1 < n; ++j) {
        fc.cos_diff[j] =
            2.0 * inv_pi * el.integrate([j](double x) { return std::cos(j * x); }, tol, "cos_diff", j);
        if (j > 0)
            fc.sin_diff[j] =
                2.0 * inv_pi * el.integrate([j](double x) { return std::sin(j * x); }, tol, "sin_diff", j);
    }

    // Interior rule for the two parity bases of a_theta; the nodes never touch 0 or pi.
    {
        const auto &lv = el.build(256);
        double a0 = 0.0, a1 = 0.0;
        for (std::size_t i = 0; i < lv.x.size(); ++i) {
            const double s = std::sin(lv.x[i]);
            a0 += lv.wf[i] / s;
            a1 += lv.wf[i] * std::cos(lv.x[i]) / s;
        }
        fc.a_theta[0] = inv_pi * a0;
        if (n > 1)
            fc.a_theta[1] = inv_pi * a1;
        for (int k = 1; k + 1 < n; ++k)
            fc.a_theta[k + 1] = fc.a_theta[k - 1] - fc.sin_diff[k];
    }
    return fc;
}

FourierCoefficients fourier_coeffs(const AngularSpectrum &spec, int max_harmonic)
{
    return fourier_coeffs(spectrum_weights(spec), max_harmonic);
}

} // namespace fdmimo
