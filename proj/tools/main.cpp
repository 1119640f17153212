// SPDX-License-Identifier: Apache-2.0
//
// charm: radio-map-aided channel estimation for pilot-starved MIMO-OFDM
// Copyright (C) 2026 The charm authors
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

// charm: generate scenarios, run experiments, and report results.
//
// Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration or usage, 3 file I/O, 4 numerical failure.

#include "commands.hpp"

#include "charm/error.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace
{

enum ExitCode
{
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_io = 3,
    exit_numeric = 4,
};

template <class T> void optional_option(CLI::App &app, const std::string &name, std::optional<T> &target,
                                        const std::string &help)
{
    app.add_option_function<T>(name, [&target](const T &v) { target = v; }, help);
}

} // namespace

int main(int argc, char **argv)
{
    using namespace charm::cli;

    CLI::App app{"charm: radio-map-aided channel estimation experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "charm 0.1.0");

    GenOptions gen;
    auto *gen_cmd = app.add_subcommand("gen", "write location scenario files and a manifest");
    optional_option(*gen_cmd, "--config", gen.config, "JSON config file (comments allowed)");
    gen_cmd->add_option("--out", gen.out, "output directory")->required();
    optional_option(*gen_cmd, "--seed", gen.seed, "master seed");
    optional_option(*gen_cmd, "--locations", gen.locations, "number of locations");
    gen_cmd->add_flag("--on-grid", gen.on_grid, "snap all path parameters to the dictionary grids");

    RunOptions run;
    auto *run_cmd = app.add_subcommand("run", "run a Monte-Carlo sweep and write a results CSV");
    optional_option(*run_cmd, "--config", run.config, "JSON config file (comments allowed)");
    optional_option(*run_cmd, "--preset", run.preset, "fig2, fig3, fig4, fig5 or table1");
    optional_option(*run_cmd, "--out", run.out, "results CSV (default $CHARM_OUT_DIR/results_<preset>.csv)");
    optional_option(*run_cmd, "--seed", run.seed, "master seed");
    optional_option(*run_cmd, "--jobs", run.jobs, "worker threads");
    optional_option(*run_cmd, "--scenarios", run.scenarios, "scenario directory written by gen");
    optional_option(*run_cmd, "--methods", run.methods, "comma-separated method names");
    optional_option(*run_cmd, "--locations", run.locations, "number of generated locations");
    run_cmd->add_flag("--on-grid", run.on_grid, "snap generated path parameters to the dictionary grids");

    ReportOptions report;
    auto *report_cmd = app.add_subcommand("report", "summarize a results CSV");
    report_cmd->add_option("--in", report.in, "results CSV")->required();
    optional_option(*report_cmd, "--figure", report.figure, "write plot data for fig2, fig3, fig4 or fig5");
    report_cmd->add_flag("--table", report.table, "print the summary table with speedup over omp3d");
    optional_option(*report_cmd, "--out", report.out, "plot-data file (default $CHARM_OUT_DIR/<figure>.dat)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForAllHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        app.exit(e);
        return exit_config;
    }

    try
    {
        if (gen_cmd->parsed())
            cmd_gen(gen, std::cout);
        else if (run_cmd->parsed())
            cmd_run(run, std::cout);
        else if (report_cmd->parsed())
            cmd_report(report, std::cout);
        return exit_ok;
    }
    catch (const charm::ConfigError &e)
    {
        std::cerr << "charm: configuration error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const charm::IoError &e)
    {
        std::cerr << "charm: I/O error: " << e.what() << '\n';
        return exit_io;
    }
    catch (const charm::NumericError &e)
    {
        std::cerr << "charm: numerical error: " << e.what() << '\n';
        return exit_numeric;
    }
    catch (const std::exception &e)
    {
        std::cerr << "charm: " << e.what() << '\n';
        return exit_failure;
    }
}
