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
#include <string>
#include <vector>

#include "fdmimo/beamforming.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/grouping.hpp"
#include "fdmimo/maxmin_sdp.hpp"

namespace fdmimo {

// Spectrum from the configuration's pattern and spectrum sections.
AngularSpectrum base_spectrum(const ScenarioConfig &cfg);

// Elevation of the line of sight from the base station, 90 deg being the horizon:
//   90 deg + atan((bs_height - user_height) / distance)
double elevation_los(double distance_m, const CellSection &cell);

struct UserDrop {
    double distance_m = 0.0;
    double bearing = 0.0;   // radians from boresight
    double theta_los = 0.0; // radians
    int support = -1;       // grouping support the elevation was drawn from, or -1
    AngularSpectrum spectrum;
    LinkBudget link;
};

// Users uniform over the annulus area [min_distance, radius] and the sector, or, with
// users.in_group_supports, elevations uniform inside a uniformly chosen grouping support.
// Elevation spectra centre on the line of sight; the azimuth mean is the bearing or fixed.
std::vector<UserDrop> drop_users(const ScenarioConfig &cfg, std::uint64_t seed);

// Element correlations of a drop, one per user.
std::vector<ElementCorrelationMatrix> user_correlations(const std::vector<UserDrop> &users, const ScenarioConfig &cfg);

std::vector<CMatrix> port_correlations(const std::vector<ElementCorrelationMatrix> &users, const PortWeightMatrix &w);

// Deterministic min-SIR with every port on the 3GPP downtilt vector for theta_tilt.
double baseline_cst(double theta_tilt, const std::vector<ElementCorrelationMatrix> &users);

struct CstCurve {
    std::vector<double> tilt_deg;
    std::vector<double> min_sir;
    double best_tilt_deg = 0.0;
    double best_min_sir = 0.0;
};

std::vector<double> tilt_grid_deg(const ExperimentSection &e);
CstCurve baseline_cst_grid(const std::vector<ElementCorrelationMatrix> &users, const std::vector<double> &grid_deg);

// Two vertical regions split at the midpoint of the two tilts. Region users are rebuilt with
// that region's vertical beamwidth and served among themselves; each user's SIR is converted to
// the time-shared equivalent (1 + SIR)^(|K_s| / K) - 1 and the minimum is reported.
struct SbtResult {
    double min_sir = 0.0;
    int count[2] = {0, 0};     // users per region (high tilt, low tilt)
    double activity[2] = {0.0, 0.0};
};

inline constexpr double kSbtHighTiltDeg = 113.75;
inline constexpr double kSbtHighBeamwidthDeg = 21.0;
inline constexpr double kSbtLowTiltDeg = 96.51;
inline constexpr double kSbtLowBeamwidthDeg = 6.5;

SbtResult baseline_sbt(const std::vector<UserDrop> &users, const ScenarioConfig &cfg);

// Tilt at the uniform mean of the line-of-sight elevations.
struct MuabResult {
    double tilt = 0.0; // radians
    double min_sir = 0.0;
};

MuabResult baseline_muab(const std::vector<UserDrop> &users, const std::vector<ElementCorrelationMatrix> &re);

// Mean over draws of the instantaneous MRT SIR per user, h_k = R_k^(1/2) z_k; returns the minimum
// over users. Draw t uses substream t of `seed`.
double mc_min_sir(const std::vector<CMatrix> &r_bs, int draws, std::uint64_t seed);
std::vector<double> mc_mean_sir(const std::vector<CMatrix> &r_bs, int draws, std::uint64_t seed);
std::vector<double> mc_mean_sinr(const std::vector<CMatrix> &r_bs, const std::vector<LinkBudget> &links, int draws,
                                 std::uint64_t seed);

// Common-weight optimizer on one drop with the configured extraction.
struct SdbDropResult {
    SdbSolution solution;
    CVector w;
    double min_sir = 0.0; // achieved, deterministic
};

SdbDropResult run_sdb(const std::vector<ElementCorrelationMatrix> &users, const ScenarioConfig &cfg, std::uint64_t seed);

struct UgSdbDropResult {
    GroupAssignment proposed;
    UgSdbResult proposed_result;
    bool has_kmeans = false;
    GroupAssignment kmeans;
    UgSdbResult kmeans_result;
};

UgSdbDropResult run_ugsdb(const std::vector<ElementCorrelationMatrix> &users, const ScenarioConfig &cfg,
                          std::uint64_t seed);

// ---- experiments ----------------------------------------------------------------------

struct Table {
    std::string name; // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct RunOptions {
    int threads = 1;
    bool verbose = false; // adds the solver trace table
};

struct RunOutput {
    std::string command;
    std::vector<Table> tables;
    std::vector<std::string> warnings;
};

// Commands: validate-scf, single-user, sdb, baselines, ugsdb, sweep. Validation failures that
// depend on the command throw ConfigError before any computation.
RunOutput run_experiment(const ScenarioConfig &cfg, const std::string &command, const RunOptions &opt = {});

// CSV text with a metadata preamble (command, config hash, seeds, overrides) and a header row.
std::string render_csv(const Table &t, const ScenarioConfig &cfg, const std::string &command);

// Writes <dir>/<command>_<table>.csv for every table and returns the paths.
std::vector<std::string> write_outputs(const RunOutput &out, const ScenarioConfig &cfg, const std::string &dir);

double to_db(double v);
std::string fmt(double v);

} // namespace fdmimo
