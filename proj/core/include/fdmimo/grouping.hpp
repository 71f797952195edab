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
#include <iosfwd>
#include <string>
#include <vector>

#include "fdmimo/angular.hpp"
#include "fdmimo/beamforming.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/maxmin_sdp.hpp"

namespace fdmimo {

// Elevation groups. delta is the elevation spread of each group's spectrum and also the width of
// its support [theta_0g - delta / 2, theta_0g + delta / 2]; supports must be disjoint. Ports are
// split into `groups` contiguous blocks of n_bs / groups; block g serves group g.
struct GroupingConfig {
    int groups = 3;
    std::vector<double> theta_0g; // radians
    double delta = deg2rad(7.5);  // radians
    std::vector<int> rank;        // per-group subspace ranks summing to M, empty = M / groups

    double support_half_width() const { return 0.5 * delta; }

    // Throws std::invalid_argument listing the first violated condition.
    void validate(const ArrayGeometry &geom) const;
    int group_rank(int g, const ArrayGeometry &geom) const;
};

// Spectrum used to build the subspace of group g: elevation Laplacian centred on theta_0g with
// spread delta, azimuth and pattern from `base`.
AngularSpectrum group_spectrum(const GroupingConfig &cfg, int g, const AngularSpectrum &base);

// Orthonormal M x r_g bases from the dominant eigenvectors of each group's R^E.
std::vector<CMatrix> build_group_subspaces(const GroupingConfig &cfg, const AngularSpectrum &base,
                                           const ArrayGeometry &geom, int n0 = 30);

// Eigenvectors of the r largest eigenvalues of a Hermitian matrix.
CMatrix dominant_eigenspace(const CMatrix &r, int rank);

// Smallest rank capturing `fraction` of the trace, capped at `cap`.
int energy_rank(const CMatrix &r, double fraction = 0.95, int cap = 60);

// ||U U^H - V V^H||_F^2 = r_u + r_v - 2 ||U^H V||_F^2. Throws std::invalid_argument when either
// input deviates from orthonormal by more than 1e-8.
double chordal_distance(const CMatrix &u, const CMatrix &v);

struct GroupAssignment {
    std::vector<int> group;                     // per user
    std::vector<std::vector<double>> distance;  // per user, per group
    std::vector<std::vector<int>> members;      // per group, ascending

    int groups() const { return static_cast<int>(members.size()); }
};

GroupAssignment make_assignment(const std::vector<int> &group, int groups,
                                std::vector<std::vector<double>> distance = {});

// Each user's dominant eigenspace (rank from `ranks`, or energy_rank when empty) joins the
// nearest group by chordal distance; ties go to the lowest group index.
GroupAssignment assign_users(const std::vector<ElementCorrelationMatrix> &users, const std::vector<CMatrix> &bases,
                             const std::vector<int> &ranks = {});

std::vector<CMatrix> user_eigenspaces(const std::vector<ElementCorrelationMatrix> &users,
                                      const std::vector<int> &ranks = {});

// Lloyd iterations under chordal distance. Seeding is k-means++ from `seed`; a centroid is
// the dominant eigenspace of its members' mean projector with the rounded mean member rank.
// Stops at an assignment fixed point or after max_iter rounds.
GroupAssignment kmeans_baseline(const std::vector<CMatrix> &subspaces, int groups, std::uint64_t seed,
                                int max_iter = 100);

struct UgSdbResult {
    std::vector<CVector> group_weights;         // one per group
    std::vector<double> user_sir;               // intra-group deterministic SIR
    std::vector<double> user_sir_composite;     // all users, all ports, composite weights
    double min_sir = 0.0;
    double min_sir_composite = 0.0;
    std::vector<bool> overloaded;               // K_g > ports per group
    std::vector<std::string> warnings;
};

// Runs the common-weight optimizer per group on that group's users and ports. Interference is
// counted within the group only; the composite figures (every user against every other user,
// ports weighted by their group's vector) are reported as a leakage diagnostic. A group with a
// single user gets the principal eigenvector of its diagonal-block sum. Groups may run on
// separate threads; group g uses substream g of `seed`.
UgSdbResult ug_sdb(const std::vector<ElementCorrelationMatrix> &users, const GroupAssignment &assignment,
                   const SolverConfig &solver, std::uint64_t seed, int threads = 1);

// user,group,d_0,...,d_{G-1}
void write_assignment_csv(std::ostream &os, const GroupAssignment &a);

} // namespace fdmimo
