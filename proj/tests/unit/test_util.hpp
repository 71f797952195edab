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

#include <cmath>
#include <functional>

#include "fdmimo/angular.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/rng.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo::testing {

inline CVector random_unit(int n, Rng &rng)
{
    CVector v(n);
    for (int i = 0; i < n; ++i)
        v(i) = rng.complex_normal(1.0);
    return v / v.norm();
}

inline CMatrix random_matrix(int rows, int cols, Rng &rng)
{
    CMatrix a(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            a(i, j) = rng.complex_normal(1.0);
    return a;
}

inline CMatrix random_hermitian(int n, Rng &rng)
{
    const CMatrix a = random_matrix(n, n, rng);
    return 0.5 * (a + a.adjoint());
}

// A A^H with A n x r, so rank at most r.
inline CMatrix random_psd(int n, Rng &rng, int r = -1)
{
    const CMatrix a = random_matrix(n, r < 0 ? n : r, rng);
    return a * a.adjoint();
}

// Unit-trace PSD matrix.
inline CMatrix random_density(int n, Rng &rng, int r = -1)
{
    const CMatrix p = random_psd(n, rng, r);
    return p / p.trace().real();
}

// Composite Simpson rule; independent of the library's Gauss-Legendre machinery.
inline double simpson(const std::function<double(double)> &f, double a, double b, int intervals)
{
    if (intervals % 2)
        ++intervals;
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i)
        s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// The validation spectrum: Laplacian elevation (100 deg, 15 deg), von Mises azimuth (60 deg, 10).
inline AngularSpectrum validation_spectrum()
{
    AngularSpectrum s;
    s.elevation.mean = deg2rad(100.0);
    s.elevation.spread = deg2rad(15.0);
    s.azimuth.mean = kPi / 3.0;
    s.azimuth.kappa = 10.0;
    return s;
}

inline ArrayGeometry validation_geometry()
{
    ArrayGeometry g;
    g.n_e = 10;
    g.n_bs = 8;
    return g;
}

// Spectrum with random means and spreads in the ranges used by the cell scenarios.
inline AngularSpectrum random_spectrum(Rng &rng)
{
    AngularSpectrum s;
    s.elevation.mean = deg2rad(rng.uniform(90.0, 115.0));
    s.elevation.spread = deg2rad(rng.uniform(5.0, 20.0));
    s.azimuth.mean = deg2rad(rng.uniform(-60.0, 60.0));
    s.azimuth.kappa = rng.uniform(2.0, 20.0);
    return s;
}

} // namespace fdmimo::testing
