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

#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

namespace fdmimo::specfun {

// ---- Gauss-Legendre quadrature ------------------------------------------------

struct GaussRule {
    std::vector<double> nodes;   // on [-1, 1], ascending
    std::vector<double> weights;
};

// n-point rule, cached per process.
const GaussRule &gauss_legendre(int n);

// Composite rule: [a, b] split into `panels` equal panels of `order` points each.
double integrate_composite(const std::function<double(double)> &f, double a, double b, int panels, int order = 16);

// Doubles the panel count from `min_panels` until two successive results differ by at most
// `abs_tol`. Throws std::runtime_error when `max_panels` is exceeded.
double integrate_adaptive(const std::function<double(double)> &f, double a, double b, double abs_tol = 1e-12,
                          int min_panels = 4, int max_panels = 1 << 14, int order = 16);

// ---- Legendre family -----------------------------------------------------------

// P_n(x) by the Bonnet recurrence. |x| may exceed 1 by at most 1e-12.
double legendre(int n, double x);

// P_0(x) .. P_nmax(x).
std::vector<double> legendre_all(int nmax, double x);

// Fully scaled associated Legendre function
//     Pbar_n^m(x) = sqrt((n + 1/2) (n - m)! / (n + m)!) P_n^m(x)
// without the Condon-Shortley phase, so Pbar_n^n(x) >= 0 on [-1, 1].
double assoc_legendre_norm(int n, int m, double x);

// Triangular table of Pbar_n^m(x) for 0 <= m <= n <= nmax, entry (n, m) at n (n + 1) / 2 + m.
std::vector<double> assoc_legendre_norm_all(int nmax, double x);

inline std::size_t tri_index(int n, int m) { return static_cast<std::size_t>(n) * (n + 1) / 2 + m; }

// ---- Spherical Bessel ----------------------------------------------------------

// j_n(x), x >= 0.
double spherical_bessel(int n, double x);

// j_0(x) .. j_nmax(x) in one downward sweep.
std::vector<double> spherical_bessel_all(int nmax, double x);

// ---- Trigonometric expansion table ---------------------------------------------

// Coefficients of P_l(cos x) and Pbar_l^m(cos x) in the trigonometric basis on (0, pi):
//   even order m: Pbar_l^m(cos x) = sum_j coef(l, m, j) cos(j x)
//   odd order m:  Pbar_l^m(cos x) = sum_j coef(l, m, j) sin(j x)
// Only harmonics j with the parity of l are non-zero. Degrees run to 2 * max_degree.
// The unnormalized Legendre polynomials are described through
//   P_n(cos x) = sum_{k=0}^{n} p_k p_{n-k} cos((n - 2k) x).
class TrigExpansionTable {
public:
    TrigExpansionTable() = default;

    int max_degree() const { return n0_; }
    int max_order() const { return 2 * n0_; }

    // p_n for n = 0 .. 2 * max_degree
    double p(int n) const { return p_.at(static_cast<std::size_t>(n)); }
    const std::vector<double> &p_values() const { return p_; }

    double coef(int l, int m, int j) const;

    // Named families, indices as they appear in the series:
    //   c_even(n, m, k) : cos(2k x)     coefficient of Pbar_{2n}^{2m}
    //   d_even(n, m, k) : sin(2k x)     coefficient of Pbar_{2n}^{2m-1}
    //   c_odd(n, m, k)  : cos((2k-1) x) coefficient of Pbar_{2n-1}^{2m}
    //   d_odd(n, m, k)  : sin((2k-1) x) coefficient of Pbar_{2n-1}^{2m-1}
    double c_even(int n, int m, int k) const { return coef(2 * n, 2 * m, 2 * k); }
    double d_even(int n, int m, int k) const { return coef(2 * n, 2 * m - 1, 2 * k); }
    double c_odd(int n, int m, int k) const { return coef(2 * n - 1, 2 * m, 2 * k - 1); }
    double d_odd(int n, int m, int k) const { return coef(2 * n - 1, 2 * m - 1, 2 * k - 1); }

    // Reconstruct Pbar_l^m(cos x) from the stored coefficients.
    double reconstruct(int l, int m, double x) const;

    // Reconstruct P_l(cos x) from the p_n values.
    double reconstruct_legendre(int l, double x) const;

    // Panels used by the final projection.
    int panels() const { return panels_; }

    // CSV: degree,order,harmonic,value (order -1 holds the p_n row: degree n, harmonic 0).
    void write_csv(std::ostream &os) const;

    friend TrigExpansionTable build_trig_expansion(int max_degree);

private:
    int n0_ = 0;
    int panels_ = 0;
    std::vector<double> p_;
    // coef_[tri_index(l, m) * (L + 1) + j]
    std::vector<double> coef_;
};

// Coefficients by composite Gauss-Legendre projection on (0, pi); panel count doubles until
// successive results agree to 1e-10. Throws std::runtime_error on non-convergence.
TrigExpansionTable build_trig_expansion(int max_degree);

// Process-wide cache of build_trig_expansion.
const TrigExpansionTable &trig_expansion(int max_degree);

} // namespace fdmimo::specfun
