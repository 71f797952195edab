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

#include "fdmimo/angular.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/rng.hpp"
#include "fdmimo/types.hpp"

namespace fdmimo {

// Phase of element z in port s (both 1-based) relative to element (1, 1):
//   exp(i 2 pi ((s-1) d_y sin(phi) sin(theta) + (z-1) d_z cos(theta)))
cplx array_response(double phi, double theta, int z, int s, const ArrayGeometry &geom);

struct RayChannelConfig {
    int n_paths = 100;
    AngularSpectrum spec;
    ArrayGeometry geom;
    PortWeightMatrix weights;

    void validate() const;
};

enum class ChannelModel { ray, correlated };

struct ChannelRealization {
    CVector h; // one entry per port
    ChannelModel model = ChannelModel::correlated;
};

// Port channel h_s = w_s^T sum_n alpha_n sqrt(g_E(phi_n, theta_n)) v_s(phi_n, theta_n),
// alpha_n ~ CN(0, 1/N). Note the plain transpose on w_s.
// Paths are drawn in order, angles (phi then theta) before the amplitude.
// The covariance E[h h^H] equals the transpose of port_correlation(R^E, W).
ChannelRealization draw_ray_channel(const RayChannelConfig &cfg, Rng &rng);
ChannelRealization draw_ray_channel(const RayChannelConfig &cfg, std::uint64_t seed);

// h = R^(1/2) z with the Hermitian PSD square root computed once.
class CorrelatedChannelSampler {
public:
    explicit CorrelatedChannelSampler(const CMatrix &r_bs);

    ChannelRealization draw(Rng &rng) const;
    const CMatrix &sqrt_matrix() const { return sqrt_; }

private:
    CMatrix sqrt_;
};

ChannelRealization draw_correlated_channel(const CMatrix &r_bs, std::uint64_t seed);

} // namespace fdmimo
