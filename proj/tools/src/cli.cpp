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

#include "fdmimo/cli.hpp"

#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdmimo/config.hpp"
#include "fdmimo/sim.hpp"

namespace fdmimo {

namespace {

struct CommandLine {
    std::string config_path;
    std::string output_dir = "out";
    std::vector<std::string> overrides;
    int threads = 1;
    bool verbose = false;
};

void add_common(CLI::App *sub, CommandLine &cl)
{
    sub->add_option("--config", cl.config_path, "Scenario YAML file")->required();
    sub->add_option("--output", cl.output_dir, "Directory for CSV output");
    sub->add_option("--override", cl.overrides, "section.key=value, repeatable")->allow_extra_args(false);
    sub->add_option("--threads", cl.threads, "Worker threads for drops and Monte Carlo")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", cl.verbose, "Also emit the solver trace");
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"fdmimo: elevation beamforming experiments"};
    app.require_subcommand(1, 1);
    CommandLine cl;
    const char *commands[][2] = {
        {"validate-scf", "Closed-form element correlation against Monte Carlo"},
        {"single-user", "Single-user SNR and capacity for downtilt and optimal weights"},
        {"sdb", "Max-min SIR beamforming against the fixed-tilt grid"},
        {"ugsdb", "User-grouped beamforming against full beamforming and k-means grouping"},
        {"baselines", "Beamforming against fixed, switched and mean-angle tilts"},
        {"sweep", "Repeat a command over values of one config key"},
    };
    for (const auto &c : commands)
        add_common(app.add_subcommand(c[0], c[1]), cl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    ScenarioConfig cfg;
    try {
        cfg = load_config(cl.config_path, cl.overrides);
    } catch (const ConfigError &e) {
        err << "config error in '" << cl.config_path << "':\n";
        for (const auto &m : e.errors())
            err << "  " << m << '\n';
        return kExitConfig;
    }

    try {
        RunOptions opt;
        opt.threads = cl.threads;
        opt.verbose = cl.verbose;
        const RunOutput res = run_experiment(cfg, command, opt);
        for (const auto &w : res.warnings)
            err << "warning: " << w << '\n';
        for (const auto &p : write_outputs(res, cfg, cl.output_dir))
            out << p << '\n';
    } catch (const ConfigError &e) {
        err << "config error in '" << cl.config_path << "':\n";
        for (const auto &m : e.errors())
            err << "  " << m << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        err << "error: " << command << ": " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace fdmimo
