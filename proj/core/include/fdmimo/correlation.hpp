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

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "fdmimo/angular.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

// Planar array: n_bs ports side by side along y, each a vertical column of n_e elements along z.
// Spacings are in wavelengths.
struct ArrayGeometry {
    int n_e = 10;
    int n_bs = 8;
    double d_y_lambda = 0.5;
    double d_z_lambda = 0.5;

    void validate() const;
    int size() const { return n_e * n_bs; }
};

// Polar form of an element lag: length in wavelengths and angle from the z axis.
struct PairGeometry {
    double z_lag = 0.0;
    double beta = 0.0;
};

// Lags handled directly by the closed form: (0, 0), (ds > 0, dz >= 0) and (ds >= 0, dz < 0).
bool lag_in_covered_set(int ds, int dz);

// Throws std::invalid_argument for lags outside the covered set; use the conjugate of the
// negated lag for those.
PairGeometry pair_geometry(int ds, int dz, const ArrayGeometry &geom);

// Closed-form element correlation for one spectrum and truncation order. The lag-independent
// part of the series is folded into per-(n, m) weights at construction, so an evaluation costs
// O(n0^2) after the special functions.
class ScfEvaluator {
public:
    ScfEvaluator(const AngularSpectrum &spec, int n0);
    ScfEvaluator(const FourierCoefficients &fc, int n0);

    int n0() const { return n0_; }

    // Value at a covered pair geometry.
    cplx evaluate(const PairGeometry &pg) const;

    // Any lag; lags outside the covered set are conjugated from the negated lag.
    cplx at_lag(int ds, int dz, const ArrayGeometry &geom) const;

    // Zero-lag value, the mean element power gain.
    double zero_lag() const { return zero_; }

private:
    void fold(const FourierCoefficients &fc);

    int n0_;
    double zero_ = 0.0;
    std::vector<double> leg_even_, leg_odd_;          // index n
    std::vector<double> c_even_, d_even_, c_odd_, d_odd_; // index n * (n0 + 1) + m
};

// Shared evaluator, memoized per (spectrum, n0).
std::shared_ptr<const ScfEvaluator> scf_evaluator(const AngularSpectrum &spec, int n0);

cplx scf_element(int ds, int dz, const AngularSpectrum &spec, const ArrayGeometry &geom, int n0);

// Monte Carlo estimate of the element correlation.
struct McEstimate {
    cplx mean;
    double std_error_re = 0.0;
    double std_error_im = 0.0;
    std::int64_t n = 0;
};

// Samples are drawn in blocks of mc_block_size; block b uses substream b of the seed, and
// partial sums are reduced in block order, so the result does not depend on `threads`.
inline constexpr std::int64_t mc_block_size = 4096;

McEstimate scf_element_mc(int ds, int dz, const AngularSpectrum &spec, const ArrayGeometry &geom,
                          std::int64_t n_samples, std::uint64_t seed, int threads = 1);

// Same estimator for many lags over one common set of angle draws.
std::vector<McEstimate> scf_element_mc_lags(const std::vector<std::pair<int, int>> &lags,
                                            const AngularSpectrum &spec, const ArrayGeometry &geom,
                                            std::int64_t n_samples, std::uint64_t seed, int threads = 1);

// Element correlation matrix, indexed as
//   R[(s' - 1) N_E + z', (s - 1) N_E + z] = rho(s - s', z - z')
// i.e. entry (row, col) holds rho(col port - row port, col element - row element).
struct ElementCorrelationMatrix {
    ArrayGeometry geometry;
    CMatrix entries;

    // N_E x N_E block with rows in port s and columns in port t (0-based).
    CMatrix block(int s, int t) const;
    // rho(ds, dz) read back from the matrix.
    cplx lag(int ds, int dz) const;
};

// All (2 N_BS - 1)(2 N_E - 1) lags, indexed [(ds + N_BS - 1) * (2 N_E - 1) + dz + N_E - 1].
struct LagTable {
    ArrayGeometry geometry;
    std::vector<cplx> values;
    cplx at(int ds, int dz) const;
};

std::shared_ptr<const LagTable> scf_lag_table(const AngularSpectrum &spec, const ArrayGeometry &geom, int n0);

ElementCorrelationMatrix element_correlation_from_lags(const LagTable &table);

// Throws std::runtime_error when the minimum eigenvalue is below -1e-9 * lambda_max.
ElementCorrelationMatrix build_element_correlation(const AngularSpectrum &spec, const ArrayGeometry &geom, int n0,
                                                   bool check_psd = true);

void check_element_correlation(const ElementCorrelationMatrix &re);

// Downtilt weights w_z = exp(-i 2 pi (z - 1) d_z cos(tilt)) / sqrt(N_E).
CVector downtilt_weights_3gpp(double theta_tilt, const ArrayGeometry &geom);

// Per-port unit-norm weight vectors.
struct PortWeightMatrix {
    std::vector<CVector> w;

    static PortWeightMatrix uniform(const CVector &v, int n_bs);

    int n_bs() const { return static_cast<int>(w.size()); }
    int n_e() const { return w.empty() ? 0 : static_cast<int>(w.front().size()); }

    // Throws std::invalid_argument unless every vector has the same length and unit norm.
    void validate(double tol = 1e-12) const;

    // N_BS N_E x N_BS block-diagonal matrix with w_s in column s.
    CMatrix block_diagonal() const;
};

// R_BS = W^H R^E W, entry (a, b) = w_a^H R_ab w_b.
CMatrix port_correlation(const ElementCorrelationMatrix &re, const PortWeightMatrix &w);

// Memo sizes, for diagnostics.
std::size_t scf_cache_size();
void clear_scf_caches();

} // namespace fdmimo
