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

#include "fdmimo/beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fdmimo/linalg.hpp"

namespace fdmimo {

void LinkBudget::validate() const
{
    if (!(p_tx_w > 0.0) || !(path_loss > 0.0) || !(shadow > 0.0) || !(noise_var > 0.0))
        throw std::invalid_argument("LinkBudget: power, path loss, shadowing and noise must be positive");
    if (!std::isfinite(g_e_max_db))
        throw std::invalid_argument("LinkBudget: g_e_max_db must be finite");
}

double LinkBudget::rho() const
{
    return p_tx_w * path_loss * shadow * std::pow(10.0, g_e_max_db / 10.0);
}

double path_loss_linear(double distance_m, double ref_distance_m, double exponent)
{
    if (!(distance_m > 0.0) || !(ref_distance_m > 0.0))
        throw std::invalid_argument("path_loss_linear: distances must be positive");
    return std::min(1.0, std::pow(distance_m / ref_distance_m, -exponent));
}

void MultiUserScene::validate() const
{
    if (users.empty())
        throw std::invalid_argument("MultiUserScene: no users");
    if (links.size() != users.size())
        throw std::invalid_argument("MultiUserScene: need one link budget per user");
    const ArrayGeometry &g = users.front().geometry;
    for (const auto &u : users)
        if (u.geometry.n_e != g.n_e || u.geometry.n_bs != g.n_bs)
            throw std::invalid_argument("MultiUserScene: users have different array sizes");
    weights.validate(1e-9);
    if (weights.n_bs() != g.n_bs || weights.n_e() != g.n_e)
        throw std::invalid_argument("MultiUserScene: weights do not match the array");
    for (const auto &l : links)
        l.validate();
}

std::vector<CMatrix> MultiUserScene::port_correlations() const
{
    std::vector<CMatrix> out;
    out.reserve(users.size());
    for (const auto &u : users)
        out.push_back(port_correlation(u, weights));
    return out;
}

double snr_instantaneous(const CVector &h, const LinkBudget &lb)
{
    return lb.snr_scale() * h.squaredNorm();
}

PortWeightMatrix optimal_single_user_weights(const ElementCorrelationMatrix &re)
{
    PortWeightMatrix w;
    w.w.reserve(re.geometry.n_bs);
    for (int s = 0; s < re.geometry.n_bs; ++s)
        w.w.push_back(principal_eigenvector(hermitize(re.block(s, s))));
    return w;
}

double snr_deterministic(const ElementCorrelationMatrix &re, const PortWeightMatrix &w, const LinkBudget &lb)
{
    if (w.n_bs() != re.geometry.n_bs || w.n_e() != re.geometry.n_e)
        throw std::invalid_argument("snr_deterministic: weights do not match the array");
    double sum = 0.0;
    for (int s = 0; s < w.n_bs(); ++s)
        sum += w.w[s].dot(re.block(s, s) * w.w[s]).real();
    return lb.snr_scale() * sum;
}

CMatrix mrt_precoder(const CMatrix &h)
{
    const double fro2 = h.squaredNorm();
    if (!(fro2 > 0.0))
        throw std::invalid_argument("mrt_precoder: channel matrix is zero");
    return h / std::sqrt(fro2);
}

double sinr_instantaneous(int k, const CMatrix &h, const CMatrix &g, const MultiUserScene &scene)
{
    const int kk = static_cast<int>(h.cols());
    if (k < 0 || k >= kk)
        throw std::out_of_range("sinr_instantaneous: user index " + std::to_string(k) + " out of range");
    if (g.cols() != kk || g.rows() != h.rows() || static_cast<int>(scene.links.size()) != kk)
        throw std::invalid_argument("sinr_instantaneous: dimension mismatch");
    const auto hk = h.col(k);
    const double sig = std::norm(hk.dot(g.col(k)));
    double interf = 0.0;
    for (int l = 0; l < kk; ++l)
        if (l != k)
            interf += std::norm(hk.dot(g.col(l)));
    return sig / (interf + 1.0 / scene.links[k].snr_scale());
}

namespace {

// tr(A B) for square A, B without forming the product.
double trace_product_real(const CMatrix &a, const CMatrix &b)
{
    return (a.array() * b.transpose().array()).sum().real();
}

void check_user(int k, std::size_t n)
{
    if (k < 0 || static_cast<std::size_t>(k) >= n)
        throw std::out_of_range("user index " + std::to_string(k) + " out of range");
}

} // namespace

double sinr_deterministic(int k, const std::vector<CMatrix> &r_bs, const std::vector<LinkBudget> &links)
{
    check_user(k, r_bs.size());
    if (links.size() != r_bs.size())
        throw std::invalid_argument("sinr_deterministic: need one link budget per user");
    const double tk = r_bs[k].trace().real();
    double interf = 0.0, tr_all = 0.0;
    for (std::size_t l = 0; l < r_bs.size(); ++l) {
        tr_all += r_bs[l].trace().real();
        if (static_cast<int>(l) != k)
            interf += trace_product_real(r_bs[k], r_bs[l]);
    }
    return tk * tk / (interf + tr_all / links[k].snr_scale());
}

double sinr_deterministic(int k, const MultiUserScene &scene)
{
    return sinr_deterministic(k, scene.port_correlations(), scene.links);
}

double sir_deterministic(int k, const std::vector<CMatrix> &r_bs)
{
    check_user(k, r_bs.size());
    if (r_bs.size() == 1)
        return kInterferenceFree;
    const double tk = r_bs[k].trace().real();
    double interf = 0.0;
    for (std::size_t l = 0; l < r_bs.size(); ++l)
        if (static_cast<int>(l) != k)
            interf += trace_product_real(r_bs[k], r_bs[l]);
    if (!(interf > 0.0))
        return kInterferenceFree;
    return tk * tk / interf;
}

double sir_deterministic(int k, const MultiUserScene &scene)
{
    return sir_deterministic(k, scene.port_correlations());
}

double sir_deterministic_blockwise(int k, const MultiUserScene &scene)
{
    check_user(k, scene.users.size());
    if (scene.users.size() == 1)
        return kInterferenceFree;
    const auto &w = scene.weights.w;
    const int nb = scene.weights.n_bs();
    // q[u](s, t) = w_s^H R^E_{u,st} w_t
    auto forms = [&](const ElementCorrelationMatrix &re) {
        CMatrix q(nb, nb);
        for (int s = 0; s < nb; ++s)
            for (int t = 0; t < nb; ++t)
                q(s, t) = w[s].dot(re.block(s, t) * w[t]);
        return q;
    };
    const CMatrix qk = forms(scene.users[k]);
    double num = 0.0;
    for (int s = 0; s < nb; ++s)
        num += qk(s, s).real();
    double den = 0.0;
    for (int l = 0; l < scene.k(); ++l) {
        if (l == k)
            continue;
        const CMatrix ql = forms(scene.users[l]);
        cplx acc = 0.0;
        for (int s = 0; s < nb; ++s)
            for (int t = 0; t < nb; ++t)
                acc += qk(s, t) * ql(t, s);
        den += acc.real();
    }
    if (!(den > 0.0))
        return kInterferenceFree;
    return num * num / den;
}

double min_sir_deterministic(const std::vector<CMatrix> &r_bs)
{
    double m = kInterferenceFree;
    for (std::size_t k = 0; k < r_bs.size(); ++k)
        m = std::min(m, sir_deterministic(static_cast<int>(k), r_bs));
    return m;
}

} // namespace fdmimo
