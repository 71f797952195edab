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
#include <vector>

#include "fdmimo/correlation.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

enum class InnerMethod { supergradient, smoothed };

struct SolverConfig {
    InnerMethod inner_method = InnerMethod::supergradient;
    double inner_tol = 1e-6;   // best-objective improvement, relative to the problem scale
    int inner_max_iter = 5000;
    int inner_plateau = 200;   // iterations without improvement before stopping
    double eps = 1e-4;         // outer stopping threshold on F
    int max_outer = 100;
    int trials = 100;          // Gaussian randomization draws

    void validate() const;
};

// Common-weight max-min SIR problem over a set of users and a contiguous range of ports.
// For a unit-trace PSD W (N_E x N_E):
//   f_k(W)   = sum_s tr(W R_{k,ss})
//   g_k(W)^2 = sum_{l != k} sum_{s,s'} tr(W R_{k,ss'} W R_{l,s's}) = vec(W)^H Q_k vec(W)
// with Q_k = sum_{s,s'} (S_{k,s's})^T (x) R_{k,ss'} and S_k = sum_{l != k} R_l.
class SdbProblem {
public:
    // members: indices into users (empty = all); ports [port_begin, port_begin + port_count)
    // (port_count < 0 = all remaining).
    explicit SdbProblem(const std::vector<ElementCorrelationMatrix> &users, const std::vector<int> &members = {},
                        int port_begin = 0, int port_count = -1);

    int k() const { return static_cast<int>(diag_sum_.size()); }
    int n_e() const { return n_e_; }
    int n_ports() const { return n_ports_; }
    const std::vector<int> &members() const { return members_; }

    // A_k = sum_s R_{k,ss}, the gradient of f_k.
    const CMatrix &diag_sum(int k) const { return diag_sum_.at(k); }
    const CMatrix &interference_form(int k) const { return q_.at(k); }

    double f(int k, const CMatrix &w) const;
    double g_squared(int k, const CMatrix &w) const; // throws below -1e-12 * scale
    double g(int k, const CMatrix &w) const;
    // Hermitian gradient of g_k, zero where g_k vanishes.
    CMatrix grad_g(int k, const CMatrix &w) const;

    // f_k / g_k, kInterferenceFree when g_k = 0.
    double ratio(int k, const CMatrix &w) const;
    // f_k^2 / g_k^2 (the deterministic SIR for rank one W = w w^H).
    double sir(int k, const CMatrix &w) const;
    double min_sir(const CMatrix &w) const;
    double min_sir_vector(const CVector &w) const;
    // min_k f_k - lambda g_k and the lowest index attaining it.
    double objective(double lambda, const CMatrix &w, int *argmin = nullptr) const;

    // Typical magnitude of f, used to make tolerances scale free.
    double scale() const { return scale_; }

private:
    int n_e_ = 0;
    int n_ports_ = 0;
    std::vector<int> members_;
    std::vector<CMatrix> diag_sum_;
    std::vector<CMatrix> q_;
    double scale_ = 1.0;
};

// Euclidean projection onto {x >= 0, sum x = 1}.
RVector project_to_simplex(const RVector &v);
// Frobenius-nearest unit-trace PSD matrix to the Hermitian part of a.
CMatrix project_to_spectrahedron(const CMatrix &a);

struct InnerResult {
    CMatrix w;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false; // false: iteration cap reached, best iterate returned
};

// Maximizes min_k f_k - lambda g_k over the unit-trace PSD cone, starting from `start`
// (I / N_E when empty), with the method selected in cfg. Both methods return the best iterate.
InnerResult inner_maxmin(double lambda, const SdbProblem &problem, const SolverConfig &cfg,
                         const CMatrix &start = CMatrix());

// Projected supergradient ascent, step (c / sqrt(t)) * G with c = 1 / max_k ||A_k||_F, using the
// supergradient of the lowest-index active user.
InnerResult inner_maxmin_supergradient(double lambda, const SdbProblem &problem, const SolverConfig &cfg,
                                       const CMatrix &start = CMatrix());

// Projected gradient ascent with Armijo backtracking on the soft-min
//   -mu log sum_k exp(-(f_k - lambda g_k) / mu),
// with mu reduced tenfold per stage from 1e-2 to 1e-8 of the problem scale.
InnerResult inner_maxmin_smoothed(double lambda, const SdbProblem &problem, const SolverConfig &cfg,
                                  const CMatrix &start = CMatrix());

struct DinkelbachStep {
    double lambda_in = 0.0;  // lambda used by the inner solve
    double f_value = 0.0;    // F at the inner solution
    double lambda_out = 0.0; // min_k f_k / g_k at the inner solution
    int inner_iterations = 0;
    bool inner_converged = true;
};

struct DinkelbachState {
    double lambda = 0.0;
    double f_value = 0.0;
    int iteration = 0;
    CMatrix w_star;
    std::vector<DinkelbachStep> history;
    bool converged = false;     // F < eps reached
    bool inner_warning = false; // some inner solve hit its cap
};

// Requires K >= 2 and some g_k > 0 at I / N_E. Later inner solves start from the previous W*,
// which keeps every F >= 0 and lambda non-decreasing.
DinkelbachState dinkelbach(const SdbProblem &problem, const SolverConfig &cfg);

struct RandomizationResult {
    CVector w_star;
    double achieved_min_sir = 0.0;
    int l_star = 0;
    int trials = 0;
    std::vector<double> trial_min_sir;
};

// Trial l draws zeta ~ CN(0, W) from substream l of `seed`, keeps sgn(zeta) / sqrt(N_E) and
// is scored by min_k f_k^2 / g_k^2. The lowest index wins ties.
RandomizationResult gaussian_randomization(const CMatrix &w, const SdbProblem &problem, int trials,
                                           std::uint64_t seed, int threads = 1);

// Principal eigenvector of W, scored the same way.
RandomizationResult eigenvector_extraction(const CMatrix &w, const SdbProblem &problem);

struct SdbSolution {
    DinkelbachState relaxed;
    RandomizationResult extracted;
    double sdr_bound = 0.0; // min_k f_k^2 / g_k^2 at W*
};

SdbSolution solve_sdb(const SdbProblem &problem, const SolverConfig &cfg, std::uint64_t seed, int threads = 1);

} // namespace fdmimo
