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
#include <stdexcept>
#include <string>
#include <vector>

#include "fdmimo/angular.hpp"
#include "fdmimo/correlation.hpp"
#include "fdmimo/maxmin_sdp.hpp"

namespace fdmimo {

// All validation failures of a configuration, reported together.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string> &errors() const { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct SpectrumSection {
    double elevation_mean_deg = 100.0; // used where no user geometry applies
    double elevation_spread_deg = 15.0;
    double azimuth_mean_deg = 0.0;
    double azimuth_kappa = 10.0;
};

struct CellSection {
    double radius_m = 250.0;
    double min_distance_m = 30.0;
    double bs_height_m = 25.0;
    double user_height_m = 1.5;
    double sector_half_width_deg = 60.0;
};

struct UsersSection {
    int count = 8;
    std::string azimuth = "fixed"; // fixed: spectrum.azimuth_mean_deg; bearing: the user's bearing
    bool in_group_supports = false; // draw elevations inside the grouping supports
    std::string support_draw = "random"; // random: uniform support per user; balanced: user k in support k mod G
};

// Path loss is relative to ref_distance_m, so p_tx_dbm - noise_dbm is the SNR margin at that
// distance. The defaults put a single element near 3 dB SNR at the 250 m cell edge.
struct LinkSection {
    double p_tx_dbm = 30.0;
    double noise_dbm = 0.0;
    double path_loss_exponent = 3.76;
    double ref_distance_m = 30.0;
    double shadow_db = 0.0;
};

struct SeedSection {
    std::uint64_t drop = 1;
    std::uint64_t channel = 2;
    std::uint64_t solver = 3;
};

struct ExperimentSection {
    int drops = 20;
    int channel_draws = 1000;
    std::int64_t mc_samples = 100000;
    int max_port_lag = 7;
    int max_element_lag = 9;
    double tilt_start_deg = 90.0;
    double tilt_stop_deg = 120.0;
    double tilt_step_deg = 1.0;
    std::vector<double> tilts_deg{90.0, 95.0, 100.0, 105.0, 110.0};
    double user_distance_m = 250.0;
    std::string extraction = "randomization"; // or eigenvector
};

struct GroupingSection {
    int groups = 3;
    std::vector<double> theta_0g_deg{93.0, 101.0, 109.0};
    double delta_deg = 7.5;
    int rank = 0; // 0: M / groups
    double user_energy = 0.95;
    int user_rank_cap = 60;
    bool kmeans = true;
};

struct SweepSection {
    std::string command = "sdb";
    std::string key = "users.count";
    std::vector<std::string> values;
};

struct ScenarioConfig {
    ArrayGeometry array;
    ElementPattern pattern;
    SpectrumSection spectrum;
    int n0 = 30;
    CellSection cell;
    UsersSection users;
    LinkSection link;
    SeedSection seeds;
    SolverConfig solver;
    ExperimentSection experiment;
    GroupingSection grouping;
    SweepSection sweep;

    std::vector<std::string> overrides; // as applied, in order
};

// Parses YAML text, applies "dotted.key=value" overrides and validates. Unknown keys, type
// errors and range violations are collected and thrown together as ConfigError.
ScenarioConfig parse_config(const std::string &yaml_text, const std::vector<std::string> &overrides = {});
ScenarioConfig load_config(const std::string &path, const std::vector<std::string> &overrides = {});

// Every field in a fixed order; the basis of the configuration hash.
std::string canonical_yaml(const ScenarioConfig &cfg);
std::uint64_t config_hash(const ScenarioConfig &cfg); // FNV-1a 64 of canonical_yaml
std::string config_hash_hex(const ScenarioConfig &cfg);

} // namespace fdmimo
