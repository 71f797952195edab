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

#include <limits>
#include <vector>

#include "fdmimo/channel.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

// Received power scale rho = P_tx * PL * SF * 10^(G_max / 10); noise_var is sigma_n^2.
struct LinkBudget {
    double p_tx_w = 1.0;
    double path_loss = 1.0; // linear, <= 1
    double shadow = 1.0;    // linear
    double g_e_max_db = 8.0;
    double noise_var = 1.0;

    void validate() const;
    double rho() const;
    double snr_scale() const { return rho() / noise_var; }
};

// Distance-power law (d / d_ref)^-exponent, clamped to 1 inside d_ref.
double path_loss_linear(double distance_m, double ref_distance_m = 30.0, double exponent = 3.76);

// Users served by a common set of port weights.
struct MultiUserScene {
    std::vector<ElementCorrelationMatrix> users;
    PortWeightMatrix weights;
    std::vector<LinkBudget> links; // one per user

    int k() const { return static_cast<int>(users.size()); }
    void validate() const;
    // R_BS for every user under `weights`.
    std::vector<CMatrix> port_correlations() const;
};

// Value used for a ratio whose interference sum is empty.
inline constexpr double kInterferenceFree = std::numeric_limits<double>::infinity();
inline bool is_interference_free(double v) { return v == kInterferenceFree; }

double snr_instantaneous(const CVector &h, const LinkBudget &lb);
inline double snr_instantaneous(const ChannelRealization &c, const LinkBudget &lb) { return snr_instantaneous(c.h, lb); }

// Per port, the unit principal eigenvector of the diagonal block R^E_ss.
PortWeightMatrix optimal_single_user_weights(const ElementCorrelationMatrix &re);

// (rho / sigma^2) * sum_s w_s^H R^E_ss w_s
double snr_deterministic(const ElementCorrelationMatrix &re, const PortWeightMatrix &w, const LinkBudget &lb);

// G = H / sqrt(tr(H H^H)). Throws std::invalid_argument for an all-zero H.
CMatrix mrt_precoder(const CMatrix &h);

// SINR of user k (0-based) for channel columns H and precoder columns G:
//   |h_k^H g_k|^2 / (sum_{l != k} |h_k^H g_l|^2 + sigma^2 / rho_k)
double sinr_instantaneous(int k, const CMatrix &h, const CMatrix &g, const MultiUserScene &scene);

// Large-system SINR from the port correlations:
//   (tr R_k)^2 / (sum_{l != k} tr(R_k R_l) + (sigma_k^2 / rho_k) sum_j tr R_j)
double sinr_deterministic(int k, const MultiUserScene &scene);
double sinr_deterministic(int k, const std::vector<CMatrix> &r_bs, const std::vector<LinkBudget> &links);

// Same without the noise term. Returns kInterferenceFree for a single user.
double sir_deterministic(int k, const MultiUserScene &scene);
double sir_deterministic(int k, const std::vector<CMatrix> &r_bs);

// sir_deterministic evaluated from the per-block quadratic forms w_s^H R^E_{k,ss'} w_s'
// without assembling R_BS.
double sir_deterministic_blockwise(int k, const MultiUserScene &scene);

// Minimum over users of sir_deterministic.
double min_sir_deterministic(const std::vector<CMatrix> &r_bs);

} // namespace fdmimo
