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

#include "commands.hpp"

#include "charm/error.hpp"
#include "charm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

namespace charm::cli
{

namespace
{

std::string fixed(double v, int precision)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

std::string pad(const std::string &s, std::size_t width, bool left = false)
{
    if (s.size() >= width)
        return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::vector<std::string> methods_in(std::span<const TrialRecord> records)
{
    std::vector<std::string> out;
    for (const auto &r : records)
        if (std::find(out.begin(), out.end(), r.method) == out.end())
            out.push_back(r.method);
    return out;
}

void ensure_parent(const std::filesystem::path &file)
{
    const auto parent = file.parent_path();
    if (parent.empty())
        return;
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec)
        throw IoError("cannot create directory '" + parent.string() + "': " + ec.message());
}

ExperimentConfig experiment_from(const std::optional<std::filesystem::path> &config)
{
    if (!config)
        return {};
    return load_run_config(*config).experiment;
}

} // namespace

RunConfig resolve_run_config(const RunOptions &opts)
{
    RunConfig rc;
    if (opts.config)
        rc = load_run_config(*opts.config, opts.preset);
    else if (opts.preset)
        rc = preset_config(*opts.preset);
    else
        rc = default_config();

    auto &exp = rc.experiment;
    if (opts.seed)
        exp.scenario.master_seed = *opts.seed;
    if (opts.jobs)
        exp.jobs = *opts.jobs;
    if (opts.locations)
        exp.scenario.n_locations = *opts.locations;
    if (opts.on_grid)
        exp.scenario.on_grid = true;
    if (opts.methods)
        rc.methods = parse_methods(*opts.methods);
    if (opts.scenarios)
        rc.scenarios = *opts.scenarios;
    if (opts.out)
        rc.results = *opts.out;
    if (rc.results.empty())
        rc.results = default_output_dir() / ("results_" + (rc.preset.empty() ? std::string("custom") : rc.preset) + ".csv");

    exp.validate();
    rc.sweep.validate(exp.system);
    if (rc.methods.empty())
        throw ConfigError("at least one method is required");
    return rc;
}

void cmd_gen(const GenOptions &opts, std::ostream &log)
{
    ExperimentConfig exp = experiment_from(opts.config);
    if (opts.seed)
        exp.scenario.master_seed = *opts.seed;
    if (opts.locations)
        exp.scenario.n_locations = *opts.locations;
    if (opts.on_grid)
        exp.scenario.on_grid = true;
    exp.validate();
    if (opts.out.empty())
        throw ConfigError("gen: an output directory is required");

    std::error_code ec;
    std::filesystem::create_directories(opts.out, ec);
    if (ec)
        throw IoError("cannot create directory '" + opts.out.string() + "': " + ec.message());

    const auto locations = generate_locations(exp);
    std::vector<ManifestEntry> entries;
    for (const auto &loc : locations)
    {
        char name[32];
        std::snprintf(name, sizeof name, "location_%03d.json", loc.id);
        save_scenario(opts.out / name, loc);
        entries.push_back({loc.id, loc.seed, name, static_cast<int>(loc.truth.size())});
        log << "location " << pad(std::to_string(loc.id), 3) << "  paths " << pad(std::to_string(loc.truth.size()), 2)
            << "  seed " << loc.seed << '\n';
    }
    save_manifest(opts.out / "manifest.json", exp.scenario.master_seed, entries);
    log << "wrote " << entries.size() << " scenarios and manifest.json to " << opts.out.string() << " (master seed "
        << exp.scenario.master_seed << ")\n";
}

std::filesystem::path cmd_run(const RunOptions &opts, std::ostream &log)
{
    const RunConfig rc = resolve_run_config(opts);
    std::vector<Location> locations;
    if (!rc.scenarios.empty())
    {
        locations = load_scenario_directory(rc.scenarios);
        if (locations.empty())
            throw IoError("scenario directory '" + rc.scenarios.string() + "' lists no locations");
    }

    const auto records = run_sweep(rc.experiment, rc.sweep, rc.methods, locations);
    ensure_parent(rc.results);
    save_results(rc.results, records);

    log << format_table(records);
    log << "wrote " << records.size() << " records to " << rc.results.string() << '\n';
    return rc.results;
}

std::string format_table(std::span<const TrialRecord> records)
{
    using Key = std::tuple<int, double, double>;
    std::vector<Key> order;
    std::map<Key, std::vector<TrialRecord>> blocks;
    for (const auto &r : records)
    {
        const Key key{r.pilot_length, r.snr_db, r.bias_std};
        if (!blocks.contains(key))
            order.push_back(key);
        blocks[key].push_back(r);
    }

    std::ostringstream out;
    for (const auto &key : order)
    {
        const auto &block = blocks[key];
        const auto summary = aggregate(block, SweepAxis::pilot_length);
        double omp_runtime = std::nan("");
        for (const auto &s : summary)
            if (s.method == method_name(Method::omp3d))
                omp_runtime = s.median_runtime_ms;

        out << "T = " << std::get<0>(key) << ", SNR = " << fixed(std::get<1>(key), 1)
            << " dB, bias std = " << fixed(std::get<2>(key), 3) << '\n';
        out << pad("method", 16, true) << pad("NMSE dB", 10) << pad("mean dB", 10) << pad("runtime ms", 12)
            << pad("speedup", 10) << pad("trials", 8) << pad("failed", 8) << '\n';
        for (const auto &s : summary)
        {
            const double speedup = omp_runtime / s.median_runtime_ms;
            out << pad(s.method, 16, true) << pad(fixed(s.nmse_db, 2), 10) << pad(fixed(s.mean_of_db, 2), 10)
                << pad(fixed(s.median_runtime_ms, 2), 12)
                << pad(std::isfinite(speedup) ? fixed(speedup, 1) + "x" : "-", 10)
                << pad(std::to_string(s.count), 8) << pad(std::to_string(s.failed), 8) << '\n';
        }
        out << '\n';
    }
    return out.str();
}

std::string plot_data(std::span<const TrialRecord> records, const std::string &figure)
{
    const SweepAxis axis = figure_axis(figure);
    const bool runtime = figure_plots_runtime(figure);
    const auto methods = methods_in(records);
    std::map<double, std::map<std::string, double>> table;
    for (const auto &s : aggregate(records, axis))
        table[s.x][s.method] = runtime ? s.median_runtime_ms : s.nmse_db;

    std::ostringstream out;
    out << "# " << figure << ": " << (runtime ? "median online runtime (ms)" : "NMSE (dB of mean linear NMSE)")
        << " versus " << axis_name(axis) << '\n';
    if (runtime)
        out << "# logscale: y\n";
    out << "# " << axis_name(axis);
    for (const auto &m : methods)
        out << ' ' << m;
    out << '\n';
    for (const auto &[x, row] : table)
    {
        out << fixed(x, axis == SweepAxis::bias ? 3 : 1);
        for (const auto &m : methods)
        {
            const auto it = row.find(m);
            out << ' ' << (it == row.end() ? std::string("nan") : fixed(it->second, 4));
        }
        out << '\n';
    }
    return out.str();
}

std::string gnuplot_script(const std::string &figure, const std::string &data_file,
                           std::span<const std::string> methods)
{
    const bool runtime = figure_plots_runtime(figure);
    const SweepAxis axis = figure_axis(figure);
    std::ostringstream out;
    out << "# gnuplot " << figure << ".gp\n";
    out << "set terminal pngcairo size 800,600\n";
    out << "set output '" << figure << ".png'\n";
    out << "set grid\nset key best\n";
    out << "set xlabel '"
        << (axis == SweepAxis::pilot_length ? "pilot length T" : axis == SweepAxis::snr ? "SNR (dB)" : "bias std")
        << "'\n";
    if (runtime)
        out << "set logscale y\nset ylabel 'runtime (ms)'\n";
    else
        out << "set ylabel 'NMSE (dB)'\n";
    out << "plot";
    for (std::size_t i = 0; i < methods.size(); ++i)
        out << (i ? ", \\\n    " : " ") << "'" << data_file << "' using 1:" << i + 2 << " with linespoints title '"
            << methods[i] << "'";
    out << '\n';
    return out.str();
}

void cmd_report(const ReportOptions &opts, std::ostream &log)
{
    const auto records = load_results(opts.in);
    if (records.empty())
        throw IoError("results file '" + opts.in.string() + "' holds no records");

    if (opts.figure)
    {
        const std::string data = plot_data(records, *opts.figure);
        const auto file = opts.out ? *opts.out : default_output_dir() / (*opts.figure + ".dat");
        ensure_parent(file);
        write_text_file(file, data);
        auto script = file;
        script.replace_extension(".gp");
        const auto methods = methods_in(records);
        write_text_file(script, gnuplot_script(*opts.figure, file.filename().string(), methods));
        log << data;
        log << "wrote " << file.string() << " and " << script.string() << '\n';
    }
    if (opts.table || !opts.figure)
        log << format_table(records);
}

} // namespace charm::cli
