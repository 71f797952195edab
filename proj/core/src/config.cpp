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

#include "fdmimo/config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fdmimo/matrix_io.hpp"

namespace fdmimo {

namespace {

std::string join_errors(const std::vector<std::string> &errors)
{
    std::string s = "invalid configuration:";
    for (const auto &e : errors)
        s += "\n  " + e;
    return s;
}

std::string method_name(InnerMethod m)
{
    return m == InnerMethod::supergradient ? "supergradient" : "smoothed";
}

// Walks every configuration field in a fixed order. `v(section, key, field)` is called once
// per field; the parse and emit passes below share this list.
template <class V>
void visit_fields(ScenarioConfig &c, V &v)
{
    v("array", "n_e", c.array.n_e);
    v("array", "n_bs", c.array.n_bs);
    v("array", "d_y_lambda", c.array.d_y_lambda);
    v("array", "d_z_lambda", c.array.d_z_lambda);

    v("pattern", "phi_3db_deg", c.pattern.phi_3db_deg);
    v("pattern", "theta_3db_deg", c.pattern.theta_3db_deg);
    v("pattern", "a_m_db", c.pattern.a_m_db);
    v("pattern", "sla_v_db", c.pattern.sla_v_db);
    v("pattern", "g_e_max_dbi", c.pattern.g_e_max_dbi);
    v("pattern", "isotropic", c.pattern.isotropic);

    v("spectrum", "elevation_mean_deg", c.spectrum.elevation_mean_deg);
    v("spectrum", "elevation_spread_deg", c.spectrum.elevation_spread_deg);
    v("spectrum", "azimuth_mean_deg", c.spectrum.azimuth_mean_deg);
    v("spectrum", "azimuth_kappa", c.spectrum.azimuth_kappa);

    v("series", "n0", c.n0);

    v("cell", "radius_m", c.cell.radius_m);
    v("cell", "min_distance_m", c.cell.min_distance_m);
    v("cell", "bs_height_m", c.cell.bs_height_m);
    v("cell", "user_height_m", c.cell.user_height_m);
    v("cell", "sector_half_width_deg", c.cell.sector_half_width_deg);

    v("users", "count", c.users.count);
    v("users", "azimuth", c.users.azimuth);
    v("users", "in_group_supports", c.users.in_group_supports);
    v("users", "support_draw", c.users.support_draw);

    v("link", "p_tx_dbm", c.link.p_tx_dbm);
    v("link", "noise_dbm", c.link.noise_dbm);
    v("link", "path_loss_exponent", c.link.path_loss_exponent);
    v("link", "ref_distance_m", c.link.ref_distance_m);
    v("link", "shadow_db", c.link.shadow_db);

    v("seeds", "drop", c.seeds.drop);
    v("seeds", "channel", c.seeds.channel);
    v("seeds", "solver", c.seeds.solver);

    v("solver", "inner_method", c.solver.inner_method);
    v("solver", "inner_tol", c.solver.inner_tol);
    v("solver", "inner_max_iter", c.solver.inner_max_iter);
    v("solver", "inner_plateau", c.solver.inner_plateau);
    v("solver", "eps", c.solver.eps);
    v("solver", "max_outer", c.solver.max_outer);
    v("solver", "L", c.solver.trials);

    v("experiment", "drops", c.experiment.drops);
    v("experiment", "channel_draws", c.experiment.channel_draws);
    v("experiment", "mc_samples", c.experiment.mc_samples);
    v("experiment", "max_port_lag", c.experiment.max_port_lag);
    v("experiment", "max_element_lag", c.experiment.max_element_lag);
    v("experiment", "tilt_start_deg", c.experiment.tilt_start_deg);
    v("experiment", "tilt_stop_deg", c.experiment.tilt_stop_deg);
    v("experiment", "tilt_step_deg", c.experiment.tilt_step_deg);
    v("experiment", "tilts_deg", c.experiment.tilts_deg);
    v("experiment", "user_distance_m", c.experiment.user_distance_m);
    v("experiment", "extraction", c.experiment.extraction);

    v("grouping", "groups", c.grouping.groups);
    v("grouping", "theta_0g_deg", c.grouping.theta_0g_deg);
    v("grouping", "delta_deg", c.grouping.delta_deg);
    v("grouping", "rank", c.grouping.rank);
    v("grouping", "user_energy", c.grouping.user_energy);
    v("grouping", "user_rank_cap", c.grouping.user_rank_cap);
    v("grouping", "kmeans", c.grouping.kmeans);

    v("sweep", "command", c.sweep.command);
    v("sweep", "key", c.sweep.key);
    v("sweep", "values", c.sweep.values);
}

class Reader {
public:
    Reader(const YAML::Node &root, std::vector<std::string> &errors) : root_(root), errors_(errors) {}

    template <class T>
    void operator()(const char *section, const char *key, T &field)
    {
        known_[section].insert(key);
        if (!root_.IsMap())
            return;
        const YAML::Node sec = root_[section];
        if (!sec || !sec.IsMap())
            return;
        const YAML::Node n = sec[key];
        if (!n)
            return;
        const std::string path = std::string(section) + "." + key;
        try {
            read(n, field, path);
        } catch (const YAML::Exception &) {
            errors_.push_back(path + ": cannot convert '" + dump(n) + "'");
        }
    }

    void check_unknown()
    {
        if (!root_ || root_.IsNull())
            return;
        if (!root_.IsMap()) {
            errors_.push_back("top level must be a mapping of sections");
            return;
        }
        for (const auto &sec : root_) {
            const std::string name = sec.first.as<std::string>();
            auto it = known_.find(name);
            if (it == known_.end()) {
                errors_.push_back("unknown section '" + name + "'");
                continue;
            }
            if (sec.second.IsNull())
                continue;
            if (!sec.second.IsMap()) {
                errors_.push_back("section '" + name + "' must be a mapping");
                continue;
            }
            for (const auto &kv : sec.second) {
                const std::string key = kv.first.as<std::string>();
                if (!it->second.count(key))
                    errors_.push_back("unknown key '" + name + "." + key + "'");
            }
        }
    }

private:
    static std::string dump(const YAML::Node &n)
    {
        YAML::Emitter e;
        e << YAML::Flow << n;
        return e.c_str();
    }

    template <class T>
    void read(const YAML::Node &n, T &field, const std::string &)
    {
        field = n.as<T>();
    }

    void read(const YAML::Node &n, InnerMethod &field, const std::string &path)
    {
        const auto s = n.as<std::string>();
        if (s == "supergradient")
            field = InnerMethod::supergradient;
        else if (s == "smoothed")
            field = InnerMethod::smoothed;
        else
            errors_.push_back(path + ": expected supergradient or smoothed, got '" + s + "'");
    }

    void read(const YAML::Node &n, std::vector<std::string> &field, const std::string &)
    {
        field.clear();
        if (n.IsSequence()) {
            for (const auto &x : n)
                field.push_back(x.as<std::string>());
        } else {
            field.push_back(n.as<std::string>());
        }
    }

    const YAML::Node &root_;
    std::vector<std::string> &errors_;
    std::map<std::string, std::set<std::string>> known_;
};

class Writer {
public:
    template <class T>
    void operator()(const char *section, const char *key, T &field)
    {
        if (section != current_) {
            os_ << section << ":\n";
            current_ = section;
        }
        os_ << "  " << key << ": ";
        write(field);
        os_ << '\n';
    }

    std::string str() const { return os_.str(); }

private:
    void write(int v) { os_ << v; }
    void write(std::int64_t v) { os_ << v; }
    void write(std::uint64_t v) { os_ << v; }
    void write(bool v) { os_ << (v ? "true" : "false"); }
    void write(double v) { os_ << format_double(v); }
    void write(const std::string &v) { os_ << '"' << v << '"'; }
    void write(InnerMethod m) { os_ << method_name(m); }
    void write(const std::vector<double> &v)
    {
        os_ << '[';
        for (std::size_t i = 0; i < v.size(); ++i)
            os_ << (i ? ", " : "") << format_double(v[i]);
        os_ << ']';
    }
    void write(const std::vector<std::string> &v)
    {
        os_ << '[';
        for (std::size_t i = 0; i < v.size(); ++i)
            os_ << (i ? ", " : "") << '"' << v[i] << '"';
        os_ << ']';
    }

    std::ostringstream os_;
    std::string current_;
};

void set_path(YAML::Node node, const std::vector<std::string> &parts, std::size_t i, const YAML::Node &value)
{
    if (i + 1 == parts.size()) {
        node[parts[i]] = value;
        return;
    }
    if (!node[parts[i]] || !node[parts[i]].IsMap())
        node[parts[i]] = YAML::Node(YAML::NodeType::Map);
    set_path(node[parts[i]], parts, i + 1, value);
}

void apply_override(YAML::Node &root, const std::string &ov, std::vector<std::string> &errors)
{
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) {
        errors.push_back("override '" + ov + "': expected key=value");
        return;
    }
    const std::string key = ov.substr(0, eq);
    const std::string value = ov.substr(eq + 1);
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.'))
        parts.push_back(part);
    if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
        errors.push_back("override '" + ov + "': key must be section.name");
        return;
    }
    YAML::Node parsed;
    try {
        parsed = YAML::Load(value);
    } catch (const YAML::Exception &e) {
        errors.push_back("override '" + ov + "': " + e.what());
        return;
    }
    if (!root || !root.IsMap())
        root = YAML::Node(YAML::NodeType::Map);
    set_path(root, parts, 0, parsed);
}

template <class F>
void check(std::vector<std::string> &errors, bool ok, F &&message)
{
    if (!ok)
        errors.push_back(message());
}

void validate(const ScenarioConfig &c, std::vector<std::string> &errors)
{
    auto guard = [&](auto &&fn) {
        try {
            fn();
        } catch (const std::exception &e) {
            errors.push_back(e.what());
        }
    };
    guard([&] { c.array.validate(); });
    guard([&] { c.pattern.validate(); });
    guard([&] { c.solver.validate(); });
    check(errors, c.spectrum.elevation_mean_deg > 0.0 && c.spectrum.elevation_mean_deg < 180.0,
          [] { return std::string("spectrum.elevation_mean_deg must lie in (0, 180)"); });
    check(errors, c.spectrum.elevation_spread_deg > 0.0,
          [] { return std::string("spectrum.elevation_spread_deg must be positive"); });
    check(errors, c.spectrum.azimuth_kappa >= 0.0, [] { return std::string("spectrum.azimuth_kappa must be >= 0"); });
    check(errors, c.n0 >= 1 && c.n0 <= 200, [] { return std::string("series.n0 must lie in [1, 200]"); });
    check(errors, c.cell.min_distance_m > 0.0 && c.cell.min_distance_m < c.cell.radius_m,
          [] { return std::string("cell: need 0 < min_distance_m < radius_m"); });
    check(errors, c.cell.bs_height_m > c.cell.user_height_m,
          [] { return std::string("cell: bs_height_m must exceed user_height_m"); });
    check(errors, c.cell.sector_half_width_deg > 0.0 && c.cell.sector_half_width_deg <= 180.0,
          [] { return std::string("cell.sector_half_width_deg must lie in (0, 180]"); });
    check(errors, c.users.count >= 1, [] { return std::string("users.count must be >= 1"); });
    check(errors, c.users.azimuth == "fixed" || c.users.azimuth == "bearing",
          [&] { return "users.azimuth: expected fixed or bearing, got '" + c.users.azimuth + "'"; });
    check(errors, c.users.support_draw == "random" || c.users.support_draw == "balanced",
          [&] { return "users.support_draw: expected random or balanced, got '" + c.users.support_draw + "'"; });
    check(errors, c.link.path_loss_exponent > 0.0 && c.link.ref_distance_m > 0.0,
          [] { return std::string("link: path_loss_exponent and ref_distance_m must be positive"); });
    const auto &e = c.experiment;
    check(errors, e.drops >= 1, [] { return std::string("experiment.drops must be >= 1"); });
    check(errors, e.channel_draws >= 0, [] { return std::string("experiment.channel_draws must be >= 0"); });
    check(errors, e.mc_samples >= 1, [] { return std::string("experiment.mc_samples must be >= 1"); });
    // the upper bounds against the array are checked by validate-scf, the only user
    check(errors, e.max_port_lag >= 0 && e.max_element_lag >= 0,
          [] { return std::string("experiment: max_port_lag and max_element_lag must be >= 0"); });
    check(errors, e.tilt_step_deg > 0.0 && e.tilt_start_deg <= e.tilt_stop_deg && e.tilt_start_deg > 0.0 &&
                      e.tilt_stop_deg < 180.0,
          [] { return std::string("experiment: tilt grid must satisfy 0 < start <= stop < 180 and step > 0"); });
    for (double t : e.tilts_deg)
        check(errors, t > 0.0 && t < 180.0,
              [&] { return "experiment.tilts_deg: " + format_double(t) + " outside (0, 180)"; });
    check(errors, e.user_distance_m > 0.0, [] { return std::string("experiment.user_distance_m must be positive"); });
    check(errors, e.extraction == "randomization" || e.extraction == "eigenvector",
          [&] { return "experiment.extraction: expected randomization or eigenvector, got '" + e.extraction + "'"; });
    const auto &g = c.grouping;
    check(errors, g.groups >= 1 && static_cast<int>(g.theta_0g_deg.size()) == g.groups,
          [] { return std::string("grouping: theta_0g_deg needs one entry per group"); });
    check(errors, g.delta_deg > 0.0, [] { return std::string("grouping.delta_deg must be positive"); });
    check(errors, g.rank >= 0, [] { return std::string("grouping.rank must be >= 0"); });
    check(errors, g.user_energy > 0.0 && g.user_energy <= 1.0,
          [] { return std::string("grouping.user_energy must lie in (0, 1]"); });
    check(errors, g.user_rank_cap >= 1, [] { return std::string("grouping.user_rank_cap must be >= 1"); });
    static const std::set<std::string> commands{"validate-scf", "single-user", "sdb", "ugsdb", "baselines"};
    check(errors, commands.count(c.sweep.command) > 0,
          [&] { return "sweep.command: '" + c.sweep.command + "' cannot be swept"; });
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : std::runtime_error(join_errors(errors)), errors_(std::move(errors))
{
}

ScenarioConfig parse_config(const std::string &yaml_text, const std::vector<std::string> &overrides)
{
    std::vector<std::string> errors;
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception &e) {
        throw ConfigError({std::string("YAML parse error: ") + e.what()});
    }
    for (const auto &ov : overrides)
        apply_override(root, ov, errors);

    ScenarioConfig cfg;
    Reader reader(root, errors);
    visit_fields(cfg, reader);
    reader.check_unknown();
    if (errors.empty())
        validate(cfg, errors);
    if (!errors.empty())
        throw ConfigError(std::move(errors));
    cfg.overrides = overrides;
    return cfg;
}

ScenarioConfig load_config(const std::string &path, const std::vector<std::string> &overrides)
{
    std::ifstream is(path);
    if (!is)
        throw ConfigError({"cannot read config file '" + path + "'"});
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config(ss.str(), overrides);
}

std::string canonical_yaml(const ScenarioConfig &cfg)
{
    ScenarioConfig copy = cfg;
    Writer w;
    visit_fields(copy, w);
    return w.str();
}

std::uint64_t config_hash(const ScenarioConfig &cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_yaml(cfg)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash_hex(const ScenarioConfig &cfg)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
    return buf;
}

} // namespace fdmimo
