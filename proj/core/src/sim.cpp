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

#include "fdmimo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "fdmimo/channel.hpp"
#include "fdmimo/linalg.hpp"
#include "fdmimo/matrix_io.hpp"
#include "fdmimo/parallel.hpp"
#include "fdmimo/rng.hpp"

namespace fdmimo {

double to_db(double v)
{
    if (v == kInterferenceFree)
        return kInterferenceFree;
    return 10.0 * std::log10(v);
}

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

double dbm_to_w(double dbm)
{
    return std::pow(10.0, (dbm - 30.0) / 10.0);
}

double median(std::vector<double> v)
{
    if (v.empty())
        return std::nan("");
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2)
        return v[n / 2];
    if (std::isinf(v[n / 2 - 1]) || std::isinf(v[n / 2]))
        return v[n / 2 - 1] == v[n / 2] ? v[n / 2] : (std::isinf(v[n / 2]) ? v[n / 2 - 1] : v[n / 2]);
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t id)
{
    return Rng(seed).substream(id).key();
}

GroupingConfig grouping_config(const ScenarioConfig &cfg)
{
    GroupingConfig g;
    g.groups = cfg.grouping.groups;
    g.theta_0g.clear();
    for (double t : cfg.grouping.theta_0g_deg)
        g.theta_0g.push_back(deg2rad(t));
    g.delta = deg2rad(cfg.grouping.delta_deg);
    if (cfg.grouping.rank > 0)
        g.rank.assign(g.groups, cfg.grouping.rank);
    return g;
}

} // namespace

AngularSpectrum base_spectrum(const ScenarioConfig &cfg)
{
    AngularSpectrum s;
    s.elevation.mean = deg2rad(cfg.spectrum.elevation_mean_deg);
    s.elevation.spread = deg2rad(cfg.spectrum.elevation_spread_deg);
    s.azimuth.mean = deg2rad(cfg.spectrum.azimuth_mean_deg);
    s.azimuth.kappa = cfg.spectrum.azimuth_kappa;
    s.pattern = cfg.pattern;
    return s;
}

double elevation_los(double distance_m, const CellSection &cell)
{
    if (!(distance_m > 0.0))
        throw std::invalid_argument("elevation_los: distance must be positive");
    return kPi / 2 + std::atan((cell.bs_height_m - cell.user_height_m) / distance_m);
}

std::vector<UserDrop> drop_users(const ScenarioConfig &cfg, std::uint64_t seed)
{
    const Rng root(seed);
    const auto &cell = cfg.cell;
    const double height = cell.bs_height_m - cell.user_height_m;
    const double half = deg2rad(cell.sector_half_width_deg);
    const GroupingConfig gc = grouping_config(cfg);
    std::vector<UserDrop> out;
    for (int k = 0; k < cfg.users.count; ++k) {
        Rng rng = root.substream(static_cast<std::uint64_t>(k));
        UserDrop u;
        if (cfg.users.in_group_supports) {
            const double pick = rng.uniform();
            u.support = cfg.users.support_draw == "balanced" ? k % gc.groups
                                                             : std::min(gc.groups - 1, static_cast<int>(pick * gc.groups));
            const double half = gc.support_half_width();
            u.theta_los = rng.uniform(gc.theta_0g[u.support] - half, gc.theta_0g[u.support] + half);
            // Supports may reach past the cell edge or the horizon; the elevation drives the
            // correlation and the link budget uses the distance clamped to the cell.
            const double below = u.theta_los - kPi / 2;
            const double d = below > 0.0 ? height / std::tan(below) : cell.radius_m;
            u.distance_m = std::clamp(d, cell.min_distance_m, cell.radius_m);
        } else {
            const double r2 = rng.uniform(cell.min_distance_m * cell.min_distance_m, cell.radius_m * cell.radius_m);
            u.distance_m = std::sqrt(r2);
            u.theta_los = elevation_los(u.distance_m, cell);
        }
        u.bearing = rng.uniform(-half, half);

        u.spectrum = base_spectrum(cfg);
        u.spectrum.elevation.mean = u.theta_los;
        if (cfg.users.azimuth == "bearing")
            u.spectrum.azimuth.mean = u.bearing;

        u.link.p_tx_w = dbm_to_w(cfg.link.p_tx_dbm);
        u.link.noise_var = dbm_to_w(cfg.link.noise_dbm);
        u.link.path_loss = path_loss_linear(u.distance_m, cfg.link.ref_distance_m, cfg.link.path_loss_exponent);
        u.link.shadow = std::pow(10.0, cfg.link.shadow_db / 10.0);
        u.link.g_e_max_db = cfg.pattern.g_e_max_dbi;
        out.push_back(u);
    }
    return out;
}

std::vector<ElementCorrelationMatrix> user_correlations(const std::vector<UserDrop> &users, const ScenarioConfig &cfg)
{
    std::vector<ElementCorrelationMatrix> out;
    out.reserve(users.size());
    for (const auto &u : users)
        out.push_back(build_element_correlation(u.spectrum, cfg.array, cfg.n0));
    return out;
}

std::vector<CMatrix> port_correlations(const std::vector<ElementCorrelationMatrix> &users, const PortWeightMatrix &w)
{
    std::vector<CMatrix> out;
    out.reserve(users.size());
    for (const auto &u : users)
        out.push_back(port_correlation(u, w));
    return out;
}

double baseline_cst(double theta_tilt, const std::vector<ElementCorrelationMatrix> &users)
{
    if (users.empty())
        throw std::invalid_argument("baseline_cst: no users");
    const ArrayGeometry &g = users.front().geometry;
    const auto w = PortWeightMatrix::uniform(downtilt_weights_3gpp(theta_tilt, g), g.n_bs);
    return min_sir_deterministic(port_correlations(users, w));
}

std::vector<double> tilt_grid_deg(const ExperimentSection &e)
{
    std::vector<double> grid;
    const int n = static_cast<int>(std::floor((e.tilt_stop_deg - e.tilt_start_deg) / e.tilt_step_deg + 1e-9)) + 1;
    for (int i = 0; i < n; ++i)
        grid.push_back(e.tilt_start_deg + i * e.tilt_step_deg);
    return grid;
}

CstCurve baseline_cst_grid(const std::vector<ElementCorrelationMatrix> &users, const std::vector<double> &grid_deg)
{
    CstCurve c;
    for (double t : grid_deg) {
        const double v = baseline_cst(deg2rad(t), users);
        c.tilt_deg.push_back(t);
        c.min_sir.push_back(v);
        if (c.tilt_deg.size() == 1 || v > c.best_min_sir) {
            c.best_min_sir = v;
            c.best_tilt_deg = t;
        }
    }
    return c;
}

SbtResult baseline_sbt(const std::vector<UserDrop> &users, const ScenarioConfig &cfg)
{
    SbtResult res;
    if (users.empty())
        throw std::invalid_argument("baseline_sbt: no users");
    const double threshold = deg2rad(0.5 * (kSbtHighTiltDeg + kSbtLowTiltDeg));
    const double tilts[2] = {kSbtHighTiltDeg, kSbtLowTiltDeg};
    const double widths[2] = {kSbtHighBeamwidthDeg, kSbtLowBeamwidthDeg};
    std::vector<int> region[2];
    for (std::size_t k = 0; k < users.size(); ++k)
        region[users[k].theta_los >= threshold ? 0 : 1].push_back(static_cast<int>(k));

    res.min_sir = kInterferenceFree;
    const double kk = static_cast<double>(users.size());
    for (int r = 0; r < 2; ++r) {
        res.count[r] = static_cast<int>(region[r].size());
        res.activity[r] = res.count[r] / kk;
        if (region[r].empty())
            continue;
        std::vector<ElementCorrelationMatrix> re;
        for (int k : region[r]) {
            AngularSpectrum s = users[k].spectrum;
            s.pattern.theta_3db_deg = widths[r];
            re.push_back(build_element_correlation(s, cfg.array, cfg.n0));
        }
        const auto w = PortWeightMatrix::uniform(downtilt_weights_3gpp(deg2rad(tilts[r]), cfg.array), cfg.array.n_bs);
        const auto r_bs = port_correlations(re, w);
        for (std::size_t i = 0; i < re.size(); ++i) {
            const double sir = sir_deterministic(static_cast<int>(i), r_bs);
            const double eff = is_interference_free(sir) ? sir : std::pow(1.0 + sir, res.activity[r]) - 1.0;
            res.min_sir = std::min(res.min_sir, eff);
        }
    }
    return res;
}

MuabResult baseline_muab(const std::vector<UserDrop> &users, const std::vector<ElementCorrelationMatrix> &re)
{
    if (users.empty() || users.size() != re.size())
        throw std::invalid_argument("baseline_muab: need one correlation per user");
    MuabResult m;
    for (const auto &u : users)
        m.tilt += u.theta_los;
    m.tilt /= static_cast<double>(users.size());
    m.min_sir = baseline_cst(m.tilt, re);
    return m;
}

namespace {

std::vector<CMatrix> roots_of(const std::vector<CMatrix> &r_bs)
{
    std::vector<CMatrix> roots;
    roots.reserve(r_bs.size());
    for (const auto &r : r_bs)
        roots.push_back(psd_sqrt(hermitize(r)));
    return roots;
}

// Channel matrix for draw t, users in order.
CMatrix draw_channels(const std::vector<CMatrix> &roots, const Rng &base, int t)
{
    Rng rng = base.substream(static_cast<std::uint64_t>(t));
    const Eigen::Index n = roots.front().rows();
    CMatrix h(n, static_cast<Eigen::Index>(roots.size()));
    CVector z(n);
    for (std::size_t k = 0; k < roots.size(); ++k) {
        for (Eigen::Index i = 0; i < n; ++i)
            z(i) = rng.complex_normal(1.0);
        h.col(static_cast<Eigen::Index>(k)) = roots[k] * z;
    }
    return h;
}

} // namespace

std::vector<double> mc_mean_sir(const std::vector<CMatrix> &r_bs, int draws, std::uint64_t seed)
{
    const std::size_t kk = r_bs.size();
    if (kk == 0 || draws < 1)
        throw std::invalid_argument("mc_mean_sir: need users and at least one draw");
    if (kk == 1)
        return {kInterferenceFree};
    const auto roots = roots_of(r_bs);
    const Rng base(seed);
    std::vector<double> acc(kk, 0.0);
    for (int t = 0; t < draws; ++t) {
        const CMatrix h = draw_channels(roots, base, t);
        const CMatrix gram = h.adjoint() * h; // gram(k, l) = h_k^H h_l
        for (std::size_t k = 0; k < kk; ++k) {
            double interf = 0.0;
            for (std::size_t l = 0; l < kk; ++l)
                if (l != k)
                    interf += std::norm(gram(k, l));
            acc[k] += std::norm(gram(k, k)) / interf;
        }
    }
    for (double &a : acc)
        a /= draws;
    return acc;
}

double mc_min_sir(const std::vector<CMatrix> &r_bs, int draws, std::uint64_t seed)
{
    const auto v = mc_mean_sir(r_bs, draws, seed);
    return *std::min_element(v.begin(), v.end());
}

std::vector<double> mc_mean_sinr(const std::vector<CMatrix> &r_bs, const std::vector<LinkBudget> &links, int draws,
                                 std::uint64_t seed)
{
    const std::size_t kk = r_bs.size();
    if (kk == 0 || draws < 1 || links.size() != kk)
        throw std::invalid_argument("mc_mean_sinr: need users, link budgets and at least one draw");
    const auto roots = roots_of(r_bs);
    const Rng base(seed);
    std::vector<double> acc(kk, 0.0);
    for (int t = 0; t < draws; ++t) {
        const CMatrix h = draw_channels(roots, base, t);
        const CMatrix gram = h.adjoint() * h;
        const double fro2 = h.squaredNorm(); // 1 / beta^2
        for (std::size_t k = 0; k < kk; ++k) {
            double interf = 0.0;
            for (std::size_t l = 0; l < kk; ++l)
                if (l != k)
                    interf += std::norm(gram(k, l));
            acc[k] += std::norm(gram(k, k)) / (interf + fro2 / links[k].snr_scale());
        }
    }
    for (double &a : acc)
        a /= draws;
    return acc;
}

SdbDropResult run_sdb(const std::vector<ElementCorrelationMatrix> &users, const ScenarioConfig &cfg, std::uint64_t seed)
{
    SdbDropResult r;
    const SdbProblem prob(users);
    if (prob.k() < 2) {
        r.w = principal_eigenvector(prob.diag_sum(0));
        r.min_sir = kInterferenceFree;
        r.solution.sdr_bound = kInterferenceFree;
        return r;
    }
    if (cfg.experiment.extraction == "eigenvector") {
        r.solution.relaxed = dinkelbach(prob, cfg.solver);
        r.solution.sdr_bound = prob.min_sir(r.solution.relaxed.w_star);
        r.solution.extracted = eigenvector_extraction(r.solution.relaxed.w_star, prob);
    } else {
        r.solution = solve_sdb(prob, cfg.solver, seed);
    }
    r.w = r.solution.extracted.w_star;
    r.min_sir = r.solution.extracted.achieved_min_sir;
    return r;
}

UgSdbDropResult run_ugsdb(const std::vector<ElementCorrelationMatrix> &users, const ScenarioConfig &cfg,
                          std::uint64_t seed)
{
    const GroupingConfig gc = grouping_config(cfg);
    const auto bases = build_group_subspaces(gc, base_spectrum(cfg), cfg.array, cfg.n0);
    std::vector<int> ranks;
    for (const auto &u : users)
        ranks.push_back(energy_rank(u.entries, cfg.grouping.user_energy, cfg.grouping.user_rank_cap));

    UgSdbDropResult r;
    r.proposed = assign_users(users, bases, ranks);
    r.proposed_result = ug_sdb(users, r.proposed, cfg.solver, seed);
    if (cfg.grouping.kmeans && static_cast<int>(users.size()) >= gc.groups) {
        const auto spaces = user_eigenspaces(users, ranks);
        r.has_kmeans = true;
        r.kmeans = kmeans_baseline(spaces, gc.groups, sub_seed(seed, 1000));
        r.kmeans_result = ug_sdb(users, r.kmeans, cfg.solver, seed);
    }
    return r;
}

// ---- experiments ----------------------------------------------------------------------

namespace {

Table summary_table()
{
    Table t;
    t.name = "summary";
    t.columns = {"metric", "value"};
    return t;
}

void require_multiuser(const ScenarioConfig &cfg, bool grouping)
{
    std::vector<std::string> errors;
    if (cfg.users.count < 2)
        errors.push_back("users.count must be >= 2 for multi-user runs");
    if (cfg.users.count >= cfg.array.n_bs)
        errors.push_back("users.count (" + std::to_string(cfg.users.count) + ") must be below array.n_bs (" +
                         std::to_string(cfg.array.n_bs) + ")");
    if (grouping || cfg.users.in_group_supports) {
        try {
            grouping_config(cfg).validate(cfg.array);
        } catch (const std::exception &e) {
            errors.push_back(e.what());
        }
    }
    if (!errors.empty())
        throw ConfigError(errors);
}

RunOutput run_validate_scf(const ScenarioConfig &cfg, const RunOptions &opt)
{
    const AngularSpectrum spec = base_spectrum(cfg);
    const auto &e = cfg.experiment;
    std::vector<std::string> errors;
    if (e.max_port_lag >= cfg.array.n_bs)
        errors.push_back("experiment.max_port_lag must lie in [0, array.n_bs)");
    if (e.max_element_lag >= cfg.array.n_e)
        errors.push_back("experiment.max_element_lag must lie in [0, array.n_e)");
    if (!errors.empty())
        throw ConfigError(errors);
    std::vector<std::pair<int, int>> lags;
    for (int ds = -e.max_port_lag; ds <= e.max_port_lag; ++ds)
        for (int dz = -e.max_element_lag; dz <= e.max_element_lag; ++dz)
            lags.emplace_back(ds, dz);
    const auto ev = scf_evaluator(spec, cfg.n0);
    const auto mc = scf_element_mc_lags(lags, spec, cfg.array, e.mc_samples, cfg.seeds.channel, opt.threads);

    Table t;
    t.name = "lags";
    t.columns = {"ds", "dz", "theory_re", "theory_im", "mc_re", "mc_im", "se_re", "se_im", "abs_err", "within_3se"};
    int inside = 0;
    double worst = 0.0;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const cplx th = ev->at_lag(lags[i].first, lags[i].second, cfg.array);
        const cplx d = th - mc[i].mean;
        const bool ok_re = std::abs(d.real()) <= 3.0 * mc[i].std_error_re + 1e-12;
        const bool ok_im = std::abs(d.imag()) <= 3.0 * mc[i].std_error_im + 1e-12;
        inside += (ok_re && ok_im);
        worst = std::max(worst, std::abs(d));
        t.add({std::to_string(lags[i].first), std::to_string(lags[i].second), fmt(th.real()), fmt(th.imag()),
               fmt(mc[i].mean.real()), fmt(mc[i].mean.imag()), fmt(mc[i].std_error_re), fmt(mc[i].std_error_im),
               fmt(std::abs(d)), (ok_re && ok_im) ? "1" : "0"});
    }
    Table s = summary_table();
    s.add({"lags", std::to_string(lags.size())});
    s.add({"within_3se", std::to_string(inside)});
    s.add({"max_abs_err", fmt(worst)});
    s.add({"mc_samples", std::to_string(e.mc_samples)});
    return {"validate-scf", {t, s}, {}};
}

RunOutput run_single_user(const ScenarioConfig &cfg, const RunOptions &)
{
    const auto &e = cfg.experiment;
    AngularSpectrum spec = base_spectrum(cfg);
    spec.elevation.mean = elevation_los(e.user_distance_m, cfg.cell);
    const auto re = build_element_correlation(spec, cfg.array, cfg.n0);
    LinkBudget lb;
    lb.p_tx_w = dbm_to_w(cfg.link.p_tx_dbm);
    lb.noise_var = dbm_to_w(cfg.link.noise_dbm);
    lb.path_loss = path_loss_linear(e.user_distance_m, cfg.link.ref_distance_m, cfg.link.path_loss_exponent);
    lb.shadow = std::pow(10.0, cfg.link.shadow_db / 10.0);
    lb.g_e_max_db = cfg.pattern.g_e_max_dbi;

    Table t;
    t.name = "strategies";
    t.columns = {"strategy", "tilt_deg", "snr_det_db", "snr_mc_db", "capacity_det", "capacity_mc", "rel_gap"};
    Table s = summary_table();
    s.add({"theta_los_deg", fmt(rad2deg(spec.elevation.mean))});

    auto evaluate = [&](const std::string &name, const std::string &tilt, const PortWeightMatrix &w) {
        const double det = snr_deterministic(re, w, lb);
        double mean_snr = 0.0, mean_cap = 0.0;
        const int draws = std::max(1, e.channel_draws);
        const CorrelatedChannelSampler sampler(port_correlation(re, w));
        const Rng base(cfg.seeds.channel);
        for (int d = 0; d < draws; ++d) {
            Rng rng = base.substream(static_cast<std::uint64_t>(d));
            const double g = snr_instantaneous(sampler.draw(rng), lb);
            mean_snr += g;
            mean_cap += std::log2(1.0 + g);
        }
        mean_snr /= draws;
        mean_cap /= draws;
        t.add({name, tilt, fmt(to_db(det)), fmt(to_db(mean_snr)), fmt(std::log2(1.0 + det)), fmt(mean_cap),
               fmt(std::abs(det - mean_snr) / mean_snr)});
        s.add({"capacity_mc_" + name, fmt(mean_cap)});
    };
    evaluate("optimal", "", optimal_single_user_weights(re));
    for (double tilt : e.tilts_deg)
        evaluate("tilt_" + fmt(tilt), fmt(tilt),
                 PortWeightMatrix::uniform(downtilt_weights_3gpp(deg2rad(tilt), cfg.array), cfg.array.n_bs));
    return {"single-user", {t, s}, {}};
}

struct DropContext {
    std::vector<UserDrop> users;
    std::vector<ElementCorrelationMatrix> re;
};

DropContext make_drop(const ScenarioConfig &cfg, int d)
{
    DropContext c;
    c.users = drop_users(cfg, sub_seed(cfg.seeds.drop, static_cast<std::uint64_t>(d)));
    c.re = user_correlations(c.users, cfg);
    return c;
}

Table trace_table()
{
    Table t;
    t.name = "solver_trace";
    t.columns = {"drop", "iteration", "lambda_in", "F", "lambda_out", "inner_iterations", "inner_converged"};
    return t;
}

void add_trace(Table &t, int d, const DinkelbachState &st)
{
    for (std::size_t i = 0; i < st.history.size(); ++i) {
        const auto &h = st.history[i];
        t.add({std::to_string(d), std::to_string(i + 1), fmt(h.lambda_in), fmt(h.f_value), fmt(h.lambda_out),
               std::to_string(h.inner_iterations), h.inner_converged ? "1" : "0"});
    }
}

RunOutput run_sdb_experiment(const ScenarioConfig &cfg, const RunOptions &opt)
{
    require_multiuser(cfg, false);
    const int drops = cfg.experiment.drops;
    const int draws = cfg.experiment.channel_draws;
    const auto grid = tilt_grid_deg(cfg.experiment);

    struct Result {
        CstCurve cst;
        std::vector<double> cst_mc;
        SdbDropResult sdb;
        double sdb_mc = std::nan("");
    };
    std::vector<Result> res(drops);
    parallel_for(drops, opt.threads, [&](std::int64_t di) {
        const int d = static_cast<int>(di);
        const DropContext ctx = make_drop(cfg, d);
        Result &r = res[d];
        r.cst = baseline_cst_grid(ctx.re, grid);
        r.sdb = run_sdb(ctx.re, cfg, sub_seed(cfg.seeds.solver, d));
        if (draws > 0) {
            const std::uint64_t ch = sub_seed(cfg.seeds.channel, d);
            for (double tilt : grid)
                r.cst_mc.push_back(mc_min_sir(
                    port_correlations(ctx.re, PortWeightMatrix::uniform(
                                                  downtilt_weights_3gpp(deg2rad(tilt), cfg.array), cfg.array.n_bs)),
                    draws, ch));
            r.sdb_mc = mc_min_sir(port_correlations(ctx.re, PortWeightMatrix::uniform(r.sdb.w, cfg.array.n_bs)),
                                  draws, ch);
        }
    });

    Table t;
    t.name = "drops";
    t.columns = {"drop", "method", "tilt_deg", "min_sir_det_db", "min_sir_mc_db"};
    Table trace = trace_table();
    std::vector<double> best_cst, sdb, sdr, sdb_mc, best_cst_mc;
    RunOutput out{"sdb", {}, {}};
    for (int d = 0; d < drops; ++d) {
        const Result &r = res[d];
        for (std::size_t i = 0; i < grid.size(); ++i)
            t.add({std::to_string(d), "cst", fmt(grid[i]), fmt(to_db(r.cst.min_sir[i])),
                   draws > 0 ? fmt(to_db(r.cst_mc[i])) : ""});
        t.add({std::to_string(d), "sdb", "", fmt(to_db(r.sdb.min_sir)), draws > 0 ? fmt(to_db(r.sdb_mc)) : ""});
        t.add({std::to_string(d), "sdr_bound", "", fmt(to_db(r.sdb.solution.sdr_bound)), ""});
        best_cst.push_back(to_db(r.cst.best_min_sir));
        sdb.push_back(to_db(r.sdb.min_sir));
        sdr.push_back(to_db(r.sdb.solution.sdr_bound));
        if (draws > 0) {
            sdb_mc.push_back(to_db(r.sdb_mc));
            best_cst_mc.push_back(to_db(*std::max_element(r.cst_mc.begin(), r.cst_mc.end())));
        }
        add_trace(trace, d, r.sdb.solution.relaxed);
        if (r.sdb.solution.relaxed.inner_warning)
            out.warnings.push_back("drop " + std::to_string(d) + ": inner solver hit its iteration cap");
    }
    Table s = summary_table();
    s.add({"drops", std::to_string(drops)});
    s.add({"median_min_sir_db_cst_best", fmt(median(best_cst))});
    s.add({"median_min_sir_db_sdb", fmt(median(sdb))});
    s.add({"median_min_sir_db_sdr_bound", fmt(median(sdr))});
    if (draws > 0) {
        s.add({"median_min_sir_mc_db_cst_best", fmt(median(best_cst_mc))});
        s.add({"median_min_sir_mc_db_sdb", fmt(median(sdb_mc))});
    }
    out.tables = {t, s};
    if (opt.verbose)
        out.tables.push_back(trace);
    return out;
}

RunOutput run_baselines(const ScenarioConfig &cfg, const RunOptions &opt)
{
    require_multiuser(cfg, false);
    const int drops = cfg.experiment.drops;
    const auto grid = tilt_grid_deg(cfg.experiment);
    struct Result {
        CstCurve cst;
        SbtResult sbt;
        MuabResult muab;
        SdbDropResult sdb;
    };
    std::vector<Result> res(drops);
    parallel_for(drops, opt.threads, [&](std::int64_t di) {
        const int d = static_cast<int>(di);
        const DropContext ctx = make_drop(cfg, d);
        Result &r = res[d];
        r.cst = baseline_cst_grid(ctx.re, grid);
        r.sbt = baseline_sbt(ctx.users, cfg);
        r.muab = baseline_muab(ctx.users, ctx.re);
        r.sdb = run_sdb(ctx.re, cfg, sub_seed(cfg.seeds.solver, d));
    });

    Table t;
    t.name = "drops";
    t.columns = {"drop",   "sdb_db",          "cst_best_db",     "cst_best_tilt_deg", "sbt_db",
                 "muab_db", "muab_tilt_deg", "sdr_bound_db", "sbt_high_region_users"};
    Table trace = trace_table();
    std::vector<double> v_sdb, v_cst, v_sbt, v_muab;
    for (int d = 0; d < drops; ++d) {
        const Result &r = res[d];
        t.add({std::to_string(d), fmt(to_db(r.sdb.min_sir)), fmt(to_db(r.cst.best_min_sir)), fmt(r.cst.best_tilt_deg),
               fmt(to_db(r.sbt.min_sir)), fmt(to_db(r.muab.min_sir)), fmt(rad2deg(r.muab.tilt)),
               fmt(to_db(r.sdb.solution.sdr_bound)), std::to_string(r.sbt.count[0])});
        v_sdb.push_back(to_db(r.sdb.min_sir));
        v_cst.push_back(to_db(r.cst.best_min_sir));
        v_sbt.push_back(to_db(r.sbt.min_sir));
        v_muab.push_back(to_db(r.muab.min_sir));
        add_trace(trace, d, r.sdb.solution.relaxed);
    }
    Table s = summary_table();
    s.add({"drops", std::to_string(drops)});
    s.add({"median_min_sir_db_sdb", fmt(median(v_sdb))});
    s.add({"median_min_sir_db_cst_best", fmt(median(v_cst))});
    s.add({"median_min_sir_db_sbt", fmt(median(v_sbt))});
    s.add({"median_min_sir_db_muab", fmt(median(v_muab))});
    RunOutput out{"baselines", {t, s}, {}};
    if (opt.verbose)
        out.tables.push_back(trace);
    return out;
}

RunOutput run_ugsdb_experiment(const ScenarioConfig &cfg, const RunOptions &opt)
{
    require_multiuser(cfg, true);
    const int drops = cfg.experiment.drops;
    struct Result {
        DropContext ctx;
        SdbDropResult sdb;
        UgSdbDropResult ug;
    };
    std::vector<Result> res(drops);
    parallel_for(drops, opt.threads, [&](std::int64_t di) {
        const int d = static_cast<int>(di);
        Result &r = res[d];
        r.ctx = make_drop(cfg, d);
        const std::uint64_t seed = sub_seed(cfg.seeds.solver, d);
        r.sdb = run_sdb(r.ctx.re, cfg, seed);
        r.ug = run_ugsdb(r.ctx.re, cfg, seed);
    });

    const int groups = cfg.grouping.groups;
    Table t;
    t.name = "drops";
    t.columns = {"drop", "sdb_db", "ugsdb_db", "ugsdb_composite_db", "ugsdb_kmeans_db", "overloaded_groups"};
    Table a;
    a.name = "assignment";
    a.columns = {"drop", "user", "theta_los_deg", "support", "group", "kmeans_group"};
    for (int g = 0; g < groups; ++g)
        a.columns.push_back("d_" + std::to_string(g));
    std::vector<double> v_sdb, v_ug, v_km;
    RunOutput out{"ugsdb", {}, {}};
    for (int d = 0; d < drops; ++d) {
        const Result &r = res[d];
        const auto &pr = r.ug.proposed_result;
        const int overloaded = static_cast<int>(std::count(pr.overloaded.begin(), pr.overloaded.end(), true));
        const double km = r.ug.has_kmeans ? r.ug.kmeans_result.min_sir : std::nan("");
        t.add({std::to_string(d), fmt(to_db(r.sdb.min_sir)), fmt(to_db(pr.min_sir)), fmt(to_db(pr.min_sir_composite)),
               r.ug.has_kmeans ? fmt(to_db(km)) : "", std::to_string(overloaded)});
        v_sdb.push_back(to_db(r.sdb.min_sir));
        v_ug.push_back(to_db(pr.min_sir));
        if (r.ug.has_kmeans)
            v_km.push_back(to_db(km));
        for (std::size_t k = 0; k < r.ctx.users.size(); ++k) {
            std::vector<std::string> row{std::to_string(d), std::to_string(k), fmt(rad2deg(r.ctx.users[k].theta_los)),
                                         std::to_string(r.ctx.users[k].support),
                                         std::to_string(r.ug.proposed.group[k]),
                                         r.ug.has_kmeans ? std::to_string(r.ug.kmeans.group[k]) : ""};
            for (int g = 0; g < groups; ++g)
                row.push_back(fmt(r.ug.proposed.distance[k][g]));
            a.add(row);
        }
        for (const auto &w : pr.warnings)
            out.warnings.push_back("drop " + std::to_string(d) + ": " + w);
    }
    Table s = summary_table();
    s.add({"drops", std::to_string(drops)});
    s.add({"median_min_sir_db_sdb", fmt(median(v_sdb))});
    s.add({"median_min_sir_db_ugsdb", fmt(median(v_ug))});
    if (!v_km.empty())
        s.add({"median_min_sir_db_ugsdb_kmeans", fmt(median(v_km))});
    out.tables = {t, a, s};
    return out;
}

RunOutput run_sweep(const ScenarioConfig &cfg, const RunOptions &opt)
{
    if (cfg.sweep.values.empty())
        throw ConfigError({"sweep.values must list at least one value"});
    Table t;
    t.name = "sweep";
    t.columns = {"key", "value", "metric", "metric_value"};
    RunOutput out{"sweep", {}, {}};
    const std::string base = canonical_yaml(cfg);
    for (const auto &v : cfg.sweep.values) {
        const ScenarioConfig sub = parse_config(base, {cfg.sweep.key + "=" + v});
        const RunOutput r = run_experiment(sub, cfg.sweep.command, opt);
        for (const auto &tab : r.tables)
            if (tab.name == "summary")
                for (const auto &row : tab.rows)
                    t.add({cfg.sweep.key, v, row[0], row[1]});
        for (const auto &w : r.warnings)
            out.warnings.push_back(cfg.sweep.key + "=" + v + ": " + w);
    }
    out.tables = {t};
    return out;
}

} // namespace

RunOutput run_experiment(const ScenarioConfig &cfg, const std::string &command, const RunOptions &opt)
{
    if (command == "validate-scf")
        return run_validate_scf(cfg, opt);
    if (command == "single-user")
        return run_single_user(cfg, opt);
    if (command == "sdb")
        return run_sdb_experiment(cfg, opt);
    if (command == "baselines")
        return run_baselines(cfg, opt);
    if (command == "ugsdb")
        return run_ugsdb_experiment(cfg, opt);
    if (command == "sweep")
        return run_sweep(cfg, opt);
    throw std::invalid_argument("unknown command '" + command + "'");
}

std::string render_csv(const Table &t, const ScenarioConfig &cfg, const std::string &command)
{
    std::ostringstream os;
    os << "# fdmimo " << command << '\n';
    os << "# config_hash: " << config_hash_hex(cfg) << '\n';
    os << "# seeds: drop=" << cfg.seeds.drop << " channel=" << cfg.seeds.channel << " solver=" << cfg.seeds.solver
       << '\n';
    os << "# array: n_e=" << cfg.array.n_e << " n_bs=" << cfg.array.n_bs << '\n';
    for (const auto &ov : cfg.overrides)
        os << "# override: " << ov << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto &row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << row[i];
        os << '\n';
    }
    return os.str();
}

std::vector<std::string> write_outputs(const RunOutput &out, const ScenarioConfig &cfg, const std::string &dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> paths;
    for (const auto &t : out.tables) {
        const fs::path p = fs::path(dir) / (out.command + "_" + t.name + ".csv");
        std::ofstream os(p, std::ios::binary);
        if (!os)
            throw std::runtime_error("cannot write '" + p.string() + "'");
        os << render_csv(t, cfg, out.command);
        paths.push_back(p.string());
    }
    const fs::path cp = fs::path(dir) / (out.command + "_config.yaml");
    std::ofstream cs(cp, std::ios::binary);
    if (!cs)
        throw std::runtime_error("cannot write '" + cp.string() + "'");
    cs << "# config_hash: " << config_hash_hex(cfg) << '\n' << canonical_yaml(cfg);
    paths.push_back(cp.string());
    return paths;
}

} // namespace fdmimo
