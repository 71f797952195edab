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
#include <vector>

#include "fdmimo/rng.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

// Element radiation pattern. Angles in degrees, attenuations in dB.
// Azimuth is measured from boresight, elevation from zenith (90 deg is the horizon).
struct ElementPattern {
    double phi_3db_deg = 65.0;
    double theta_3db_deg = 65.0;
    double a_m_db = 30.0;
    double sla_v_db = 30.0;
    double g_e_max_dbi = 8.0;
    bool isotropic = false; // unit field in every direction

    void validate() const;
};

// Wrap an angle to (-pi, pi].
double wrap_angle(double a);

// dB cuts and composite gain with clipping.
double horizontal_attenuation_db(double phi, const ElementPattern &p);
double vertical_attenuation_db(double theta, const ElementPattern &p);
double element_gain_db(double phi, double theta, const ElementPattern &p);

// Separable linear field pattern used by the correlation model (no clipping).
double horizontal_field(double phi, const ElementPattern &p);
double vertical_field(double theta, const ElementPattern &p);
double element_field_linear(double phi, double theta, const ElementPattern &p);

// Laplacian elevation density on (0, pi), truncated and renormalized:
//   f(theta) ~ exp(-sqrt(2) |theta - mean| / spread)
struct ElevationLaplacian {
    double mean = kPi / 2; // radians, in (0, pi)
    double spread = deg2rad(15.0); // radians, > 0

    void validate() const;
    double pdf(double theta) const;
    double sample(Rng &rng) const;
    double normalizer() const;
};

// Von Mises azimuth density f(phi) = exp(kappa cos(phi - mean)) / (2 pi I0(kappa)).
// kappa = 0 is the uniform density.
struct AzimuthVonMises {
    double mean = 0.0; // radians
    double kappa = 10.0;

    void validate() const;
    double pdf(double phi) const;
    double sample(Rng &rng) const; // in (-pi, pi]
};

struct AngularSpectrum {
    ElevationLaplacian elevation;
    AzimuthVonMises azimuth;
    ElementPattern pattern;

    void validate() const;
};

// Fourier-series coefficients of the power spectra.
//   a_phi(m), b_phi(m): cos / sin moments of PAS(phi) = g_H(phi) f_phi(phi) on (-pi, pi], scaled 1/pi
//   a_theta(k), b_theta(k): cos / sin moments of PES(theta) = g_V(theta) f_theta(theta) / sin(theta)
//   on (0, pi), scaled 1/pi.
// The series only needs the differences
//   cos_diff(j) = b_theta(j+1) - b_theta(j-1) = (2/pi) int g_V f_theta cos(j theta)
//   sin_diff(j) = a_theta(j-1) - a_theta(j+1) = (2/pi) int g_V f_theta sin(j theta)
// which are regular and are integrated directly. Individual a_theta values carry the endpoint
// singularity of 1/sin(theta); they are reported from a fixed interior rule for a_theta(0) and
// a_theta(1) and extended through sin_diff.
struct FourierCoefficients {
    std::vector<double> a_phi;    // m = 0 .. max_harmonic
    std::vector<double> b_phi;    // m = 0 .. max_harmonic, b_phi[0] = 0
    std::vector<double> a_theta;  // k = 0 .. max_harmonic
    std::vector<double> b_theta;  // k = 0 .. max_harmonic, b_theta[0] = 0
    std::vector<double> cos_diff; // j = 0 .. max_harmonic - 1
    std::vector<double> sin_diff; // j = 0 .. max_harmonic - 1, sin_diff[0] = 0

    int max_harmonic() const { return static_cast<int>(a_phi.size()) - 1; }

    // Extension to negative index: a_theta(-k) = a_theta(k), b_theta(-k) = -b_theta(k).
    double a_theta_ext(int k) const;
    double b_theta_ext(int k) const;
};

// Spectrum given through its weight functions; used for analytic checks.
struct SpectrumWeights {
    std::function<double(double)> azimuth;   // g_H(phi) f_phi(phi) on (-pi, pi]
    std::function<double(double)> elevation; // g_V(theta) f_theta(theta) on (0, pi)
    std::vector<double> azimuth_breaks;      // interior kinks, optional
    std::vector<double> elevation_breaks;
};

SpectrumWeights spectrum_weights(const AngularSpectrum &spec);

// Each coefficient is integrated on its own with composite Gauss-Legendre panels doubled until
// two successive values agree to 1e-12, so a coefficient does not depend on max_harmonic.
FourierCoefficients fourier_coeffs(const AngularSpectrum &spec, int max_harmonic);
FourierCoefficients fourier_coeffs(const SpectrumWeights &w, int max_harmonic);

} // namespace fdmimo
