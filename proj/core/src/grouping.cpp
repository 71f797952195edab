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

#include "fdmimo/grouping.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "fdmimo/linalg.hpp"
#include "fdmimo/matrix_io.hpp"
#include "fdmimo/parallel.hpp"
#include "fdmimo/rng.hpp"

namespace fdmimo {

void GroupingConfig::validate(const ArrayGeometry &geom) const
{
    if (groups < 1)
        throw std::invalid_argument("grouping: need at least one group");
    if (static_cast<int>(theta_0g.size()) != groups)
        throw std::invalid_argument("grouping: expected " + std::to_string(groups) + " group elevations, got " +
                                    std::to_string(theta_0g.size()));
    if (!(delta > 0.0))
        throw std::invalid_argument("grouping: delta must be positive");
    if (geom.n_bs % groups != 0)
        throw std::invalid_argument("grouping: " + std::to_string(groups) + " groups do not divide " +
                                    std::to_string(geom.n_bs) + " ports");
    const double half = support_half_width();
    std::vector<double> sorted = theta_0g;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (!(sorted[i] - half > 0.0 && sorted[i] + half < kPi))
            throw std::invalid_argument("grouping: support of group elevation " + std::to_string(rad2deg(sorted[i])) +
                                        " deg leaves (0, 180) deg");
        if (i > 0 && sorted[i] - half < sorted[i - 1] + half)
            throw std::invalid_argument("grouping: group supports overlap");
    }
    if (!rank.empty()) {
        if (static_cast<int>(rank.size()) != groups)
            throw std::invalid_argument("grouping: need one rank per group");
        int total = 0;
        for (int r : rank) {
            if (r < 1 || r > geom.size())
                throw std::invalid_argument("grouping: rank " + std::to_string(r) + " outside [1, " +
                                            std::to_string(geom.size()) + "]");
            total += r;
        }
        if (total != geom.size())
            throw std::invalid_argument("grouping: ranks sum to " + std::to_string(total) + ", expected " +
                                        std::to_string(geom.size()));
    }
}

int GroupingConfig::group_rank(int g, const ArrayGeometry &geom) const
{
    if (!rank.empty())
        return rank.at(g);
    return std::max(1, geom.size() / groups);
}

AngularSpectrum group_spectrum(const GroupingConfig &cfg, int g, const AngularSpectrum &base)
{
    AngularSpectrum s = base;
    s.elevation.mean = cfg.theta_0g.at(g);
    s.elevation.spread = cfg.delta;
    return s;
}

CMatrix dominant_eigenspace(const CMatrix &r, int rank)
{
    if (rank < 1 || rank > r.rows())
        throw std::invalid_argument("dominant_eigenspace: rank " + std::to_string(rank) + " outside [1, " +
                                    std::to_string(r.rows()) + "]");
    const HermitianEigen e = hermitian_eigen(hermitize(r));
    return e.vectors.leftCols(rank);
}

int energy_rank(const CMatrix &r, double fraction, int cap)
{
    const HermitianEigen e = hermitian_eigen(hermitize(r));
    const double total = e.values.cwiseMax(0.0).sum();
    const int lim = std::max(1, std::min<int>(cap, static_cast<int>(r.rows())));
    double acc = 0.0;
    for (int i = 0; i < lim; ++i) {
        acc += std::max(0.0, e.values(i));
        if (acc >= fraction * total)
            return i + 1;
    }
    return lim;
}

std::vector<CMatrix> build_group_subspaces(const GroupingConfig &cfg, const AngularSpectrum &base,
                                           const ArrayGeometry &geom, int n0)
{
    cfg.validate(geom);
    std::vector<CMatrix> out;
    for (int g = 0; g < cfg.groups; ++g) {
        const auto re = build_element_correlation(group_spectrum(cfg, g, base), geom, n0);
        out.push_back(dominant_eigenspace(re.entries, cfg.group_rank(g, geom)));
    }
    return out;
}

namespace {

void check_orthonormal(const CMatrix &u, const char *name)
{
    const CMatrix gram = u.adjoint() * u;
    const double dev = (gram - CMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (dev > 1e-8)
        throw std::invalid_argument(std::string("chordal_distance: ") + name + " is not orthonormal (deviation " +
                                    std::to_string(dev) + ")");
}

} // namespace

double chordal_distance(const CMatrix &u, const CMatrix &v)
{
    if (u.rows() != v.rows())
        throw std::invalid_argument("chordal_distance: bases live in different dimensions");
    check_orthonormal(u, "U");
    check_orthonormal(v, "V");
    const double cross = (u.adjoint() * v).squaredNorm();
    return std::max(0.0, static_cast<double>(u.cols() + v.cols()) - 2.0 * cross);
}

GroupAssignment make_assignment(const std::vector<int> &group, int groups, std::vector<std::vector<double>> distance)
{
    GroupAssignment a;
    a.group = group;
    a.distance = std::move(distance);
    a.members.assign(static_cast<std::size_t>(groups), {});
    for (std::size_t k = 0; k < group.size(); ++k) {
        if (group[k] < 0 || group[k] >= groups)
            throw std::out_of_range("make_assignment: group index out of range");
        a.members[group[k]].push_back(static_cast<int>(k));
    }
    return a;
}

std::vector<CMatrix> user_eigenspaces(const std::vector<ElementCorrelationMatrix> &users, const std::vector<int> &ranks)
{
    if (!ranks.empty() && ranks.size() != users.size())
        throw std::invalid_argument("user_eigenspaces: need one rank per user");
    std::vector<CMatrix> out;
    out.reserve(users.size());
    for (std::size_t k = 0; k < users.size(); ++k) {
        const int r = ranks.empty() ? energy_rank(users[k].entries) : ranks[k];
        out.push_back(dominant_eigenspace(users[k].entries, r));
    }
    return out;
}

GroupAssignment assign_users(const std::vector<ElementCorrelationMatrix> &users, const std::vector<CMatrix> &bases,
                             const std::vector<int> &ranks)
{
    if (bases.empty())
        throw std::invalid_argument("assign_users: no group bases");
    const auto spaces = user_eigenspaces(users, ranks);
    std::vector<int> group(users.size());
    std::vector<std::vector<double>> dist(users.size());
    for (std::size_t k = 0; k < users.size(); ++k) {
        int best = 0;
        for (std::size_t g = 0; g < bases.size(); ++g) {
            dist[k].push_back(chordal_distance(spaces[k], bases[g]));
            if (dist[k][g] < dist[k][best])
                best = static_cast<int>(g);
        }
        group[k] = best;
    }
    return make_assignment(group, static_cast<int>(bases.size()), std::move(dist));
}

GroupAssignment kmeans_baseline(const std::vector<CMatrix> &subspaces, int groups, std::uint64_t seed, int max_iter)
{
    const int k = static_cast<int>(subspaces.size());
    if (groups < 1 || groups > k)
        throw std::invalid_argument("kmeans_baseline: need 1 <= groups <= users");
    Rng rng(seed);

    // k-means++ seeding on chordal distance
    std::vector<CMatrix> centroid;
    centroid.push_back(subspaces[std::min<int>(k - 1, static_cast<int>(rng.uniform() * k))]);
    std::vector<double> d2(k);
    while (static_cast<int>(centroid.size()) < groups) {
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            double d = chordal_distance(subspaces[i], centroid.front());
            for (std::size_t c = 1; c < centroid.size(); ++c)
                d = std::min(d, chordal_distance(subspaces[i], centroid[c]));
            d2[i] = d * d;
            total += d2[i];
        }
        int pick = -1;
        if (total > 0.0) {
            double u = rng.uniform() * total;
            for (int i = 0; i < k; ++i) {
                if (d2[i] <= 0.0)
                    continue;
                pick = i;
                u -= d2[i];
                if (u <= 0.0)
                    break;
            }
        } else {
            pick = static_cast<int>(centroid.size()); // all coincide
        }
        centroid.push_back(subspaces[pick]);
    }

    std::vector<int> label(k, -1);
    std::vector<std::vector<double>> dist(k, std::vector<double>(groups));
    for (int it = 0; it < max_iter; ++it) {
        bool changed = false;
        for (int i = 0; i < k; ++i) {
            int best = 0;
            for (int c = 0; c < groups; ++c) {
                dist[i][c] = chordal_distance(subspaces[i], centroid[c]);
                if (dist[i][c] < dist[i][best])
                    best = c;
            }
            if (label[i] != best) {
                label[i] = best;
                changed = true;
            }
        }
        if (!changed)
            break;
        for (int c = 0; c < groups; ++c) {
            const Eigen::Index m = subspaces.front().rows();
            CMatrix proj = CMatrix::Zero(m, m);
            int count = 0;
            double rank_sum = 0.0;
            for (int i = 0; i < k; ++i) {
                if (label[i] != c)
                    continue;
                proj += subspaces[i] * subspaces[i].adjoint();
                rank_sum += static_cast<double>(subspaces[i].cols());
                ++count;
            }
            if (count == 0)
                continue; // keep the previous centroid
            const int r = std::max(1, static_cast<int>(std::lround(rank_sum / count)));
            centroid[c] = dominant_eigenspace(proj / static_cast<double>(count), r);
        }
    }
    return make_assignment(label, groups, std::move(dist));
}

UgSdbResult ug_sdb(const std::vector<ElementCorrelationMatrix> &users, const GroupAssignment &assignment,
                   const SolverConfig &solver, std::uint64_t seed, int threads)
{
    if (users.empty())
        throw std::invalid_argument("ug_sdb: no users");
    if (assignment.group.size() != users.size())
        throw std::invalid_argument("ug_sdb: assignment does not cover every user");
    const ArrayGeometry &geom = users.front().geometry;
    const int groups = assignment.groups();
    if (groups < 1 || geom.n_bs % groups != 0)
        throw std::invalid_argument("ug_sdb: group count must divide the number of ports");
    const int per = geom.n_bs / groups;

    UgSdbResult res;
    res.group_weights.assign(groups, downtilt_weights_3gpp(kPi / 2, geom));
    res.user_sir.assign(users.size(), kInterferenceFree);
    res.overloaded.assign(groups, false);
    std::vector<std::vector<std::string>> notes(groups);
    const Rng base(seed);

    parallel_for(groups, threads, [&](std::int64_t gi) {
        const int g = static_cast<int>(gi);
        const auto &mem = assignment.members[g];
        if (mem.empty()) {
            notes[g].push_back("group " + std::to_string(g) + " is empty and was skipped");
            return;
        }
        if (static_cast<int>(mem.size()) > per) {
            res.overloaded[g] = true;
            notes[g].push_back("group " + std::to_string(g) + " has " + std::to_string(mem.size()) +
                               " users for " + std::to_string(per) + " ports");
        }
        const SdbProblem prob(users, mem, g * per, per);
        if (mem.size() == 1) {
            res.group_weights[g] = principal_eigenvector(prob.diag_sum(0));
            return;
        }
        const SdbSolution sol = solve_sdb(prob, solver, base.substream(static_cast<std::uint64_t>(g)).key());
        if (sol.relaxed.inner_warning)
            notes[g].push_back("group " + std::to_string(g) + ": inner solver hit its iteration cap");
        res.group_weights[g] = sol.extracted.w_star;
        const CMatrix ww = sol.extracted.w_star * sol.extracted.w_star.adjoint();
        for (std::size_t i = 0; i < mem.size(); ++i)
            res.user_sir[mem[i]] = prob.sir(static_cast<int>(i), ww);
    });
    for (const auto &n : notes)
        res.warnings.insert(res.warnings.end(), n.begin(), n.end());

    PortWeightMatrix composite;
    for (int s = 0; s < geom.n_bs; ++s)
        composite.w.push_back(res.group_weights[s / per]);
    std::vector<CMatrix> r_bs;
    for (const auto &u : users)
        r_bs.push_back(port_correlation(u, composite));
    res.user_sir_composite.resize(users.size());
    for (std::size_t k = 0; k < users.size(); ++k)
        res.user_sir_composite[k] = sir_deterministic(static_cast<int>(k), r_bs);
    res.min_sir = *std::min_element(res.user_sir.begin(), res.user_sir.end());
    res.min_sir_composite = *std::min_element(res.user_sir_composite.begin(), res.user_sir_composite.end());
    return res;
}

void write_assignment_csv(std::ostream &os, const GroupAssignment &a)
{
    os << "user,group";
    for (int g = 0; g < a.groups(); ++g)
        os << ",d_" << g;
    os << '\n';
    for (std::size_t k = 0; k < a.group.size(); ++k) {
        os << k << ',' << a.group[k];
        for (int g = 0; g < a.groups(); ++g)
            os << ',' << (k < a.distance.size() && static_cast<std::size_t>(g) < a.distance[k].size()
                              ? format_double(a.distance[k][g])
                              : std::string());
        os << '\n';
    }
}

} // namespace fdmimo
