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

#include "fdmimo/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fdmimo/linalg.hpp"

namespace fdmimo {

cplx array_response(double phi, double theta, int z, int s, const ArrayGeometry &geom)
{
    if (z < 1 || z > geom.n_e || s < 1 || s > geom.n_bs)
        throw std::out_of_range("array_response: element (" + std::to_string(z) + ", " + std::to_string(s) +
                                ") outside the array");
    const double phase = 2.0 * kPi *
                         ((s - 1) * geom.d_y_lambda * std::sin(phi) * std::sin(theta) +
                          (z - 1) * geom.d_z_lambda * std::cos(theta));
    return std::polar(1.0, phase);
}

void RayChannelConfig::validate() const
{
    if (n_paths < 1)
        throw std::invalid_argument("RayChannelConfig: n_paths must be >= 1");
    geom.validate();
    spec.validate();
    weights.validate(1e-9);
    if (weights.n_bs() != geom.n_bs || weights.n_e() != geom.n_e)
        throw std::invalid_argument("RayChannelConfig: weights do not match the geometry");
}

ChannelRealization draw_ray_channel(const RayChannelConfig &cfg, Rng &rng)
{
    const int nb = cfg.geom.n_bs, ne = cfg.geom.n_e;
    const double var = 1.0 / cfg.n_paths;
    ChannelRealization out;
    out.model = ChannelModel::ray;
    out.h = CVector::Zero(nb);
    CVector col(ne);
    for (int n = 0; n < cfg.n_paths; ++n) {
        const double phi = cfg.spec.azimuth.sample(rng);
        const double theta = cfg.spec.elevation.sample(rng);
        const cplx alpha = rng.complex_normal(var);
        const cplx amp = alpha * std::sqrt(element_field_linear(phi, theta, cfg.spec.pattern));
        for (int s = 1; s <= nb; ++s) {
            for (int z = 1; z <= ne; ++z)
                col(z - 1) = array_response(phi, theta, z, s, cfg.geom);
            out.h(s - 1) += amp * cfg.weights.w[s - 1].cwiseProduct(col).sum(); // w_s^T v_s
        }
    }
    return out;
}

ChannelRealization draw_ray_channel(const RayChannelConfig &cfg, std::uint64_t seed)
{
    cfg.validate();
    Rng rng(seed);
    return draw_ray_channel(cfg, rng);
}

CorrelatedChannelSampler::CorrelatedChannelSampler(const CMatrix &r_bs)
{
    if (r_bs.rows() != r_bs.cols() || r_bs.rows() == 0)
        throw std::invalid_argument("CorrelatedChannelSampler: correlation matrix must be square and non-empty");
    const double scale = std::max(1.0, r_bs.cwiseAbs().maxCoeff());
    if (hermitian_defect(r_bs) > 1e-9 * scale)
        throw std::invalid_argument("CorrelatedChannelSampler: correlation matrix is not Hermitian");
    sqrt_ = psd_sqrt(hermitize(r_bs));
}

ChannelRealization CorrelatedChannelSampler::draw(Rng &rng) const
{
    CVector z(sqrt_.cols());
    for (Eigen::Index i = 0; i < z.size(); ++i)
        z(i) = rng.complex_normal(1.0);
    return {sqrt_ * z, ChannelModel::correlated};
}

ChannelRealization draw_correlated_channel(const CMatrix &r_bs, std::uint64_t seed)
{
    Rng rng(seed);
    return CorrelatedChannelSampler(r_bs).draw(rng);
}

} // namespace fdmimo
