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

#include "run_config.hpp"

#include "charm/error.hpp"
#include "charm/io.hpp"

#include <json.hpp>

#include <cstdlib>
#include <set>

namespace charm::cli
{

namespace
{

using json = nlohmann::json;

void reject_unknown(const json &obj, const std::string &section, std::initializer_list<const char *> keys)
{
    if (!obj.is_object())
        throw ConfigError("config: '" + section + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto &[key, value] : obj.items())
        if (!allowed.contains(key))
        {
            std::string list;
            for (const auto &k : allowed)
                list += (list.empty() ? "" : ", ") + k;
            throw ConfigError("config: unknown key '" + section + (section.empty() ? "" : ".") + key +
                              "'; expected one of: " + list);
        }
}

template <class T> bool read(const json &obj, const char *key, T &out, const std::string &section)
{
    const auto it = obj.find(key);
    if (it == obj.end())
        return false;
    try
    {
        out = it->template get<T>();
    }
    catch (const json::exception &)
    {
        throw ConfigError("config: '" + section + "." + key + "' has the wrong type");
    }
    return true;
}

std::vector<double> range(double first, double last, double step)
{
    std::vector<double> out;
    const int n = static_cast<int>(std::lround((last - first) / step));
    for (int i = 0; i <= n; ++i)
        out.push_back(first + i * step);
    return out;
}

void apply_system(SystemConfig &sys, const json &j)
{
    reject_unknown(j, "system",
                   {"n_tx", "n_rx", "n_subcarriers", "subcarrier_spacing_hz", "carrier_freq_hz", "g_theta", "g_phi",
                    "g_tau"});
    bool resized = read(j, "n_tx", sys.n_tx, "system");
    resized |= read(j, "n_rx", sys.n_rx, "system");
    resized |= read(j, "n_subcarriers", sys.n_subcarriers, "system");
    if (resized)
    {
        const auto d = SystemConfig::with_default_dictionaries(sys.n_tx, sys.n_rx, sys.n_subcarriers);
        sys.g_theta = d.g_theta;
        sys.g_phi = d.g_phi;
        sys.g_tau = d.g_tau;
    }
    read(j, "subcarrier_spacing_hz", sys.subcarrier_spacing, "system");
    read(j, "carrier_freq_hz", sys.carrier_freq, "system");
    read(j, "g_theta", sys.g_theta, "system");
    read(j, "g_phi", sys.g_phi, "system");
    read(j, "g_tau", sys.g_tau, "system");
}

void apply_scenario(ScenarioConfig &sc, const json &j)
{
    reject_unknown(j, "scenario",
                   {"n_locations", "trials_per_location", "path_count", "aoa_max_rad", "aod_max_rad",
                    "delay_range_fraction", "tau_rms_fraction", "on_grid", "master_seed"});
    read(j, "n_locations", sc.n_locations, "scenario");
    read(j, "trials_per_location", sc.trials_per_location, "scenario");
    std::array<int, 2> counts{};
    if (read(j, "path_count", counts, "scenario"))
    {
        sc.path_count_min = counts[0];
        sc.path_count_max = counts[1];
    }
    read(j, "aoa_max_rad", sc.aoa_max, "scenario");
    read(j, "aod_max_rad", sc.aod_max, "scenario");
    std::array<double, 2> delays{};
    if (read(j, "delay_range_fraction", delays, "scenario"))
    {
        sc.delay_min_fraction = delays[0];
        sc.delay_max_fraction = delays[1];
    }
    read(j, "tau_rms_fraction", sc.tau_rms_fraction, "scenario");
    read(j, "on_grid", sc.on_grid, "scenario");
    read(j, "master_seed", sc.master_seed, "scenario");
}

void apply_sweep(SweepSpec &sw, const json &j)
{
    reject_unknown(j, "sweep", {"axis", "values", "fixed"});
    std::string axis;
    if (read(j, "axis", axis, "sweep"))
        sw.axis = parse_axis(axis);
    read(j, "values", sw.values, "sweep");
    if (const auto it = j.find("fixed"); it != j.end())
    {
        reject_unknown(*it, "sweep.fixed", {"T", "snr_db", "bias_std"});
        read(*it, "T", sw.fixed.pilot_length, "sweep.fixed");
        read(*it, "snr_db", sw.fixed.snr_db, "sweep.fixed");
        read(*it, "bias_std", sw.fixed.bias_std, "sweep.fixed");
    }
}

} // namespace

const std::vector<std::string> &preset_names()
{
    static const std::vector<std::string> names{"fig2", "fig3", "fig4", "fig5", "table1"};
    return names;
}

RunConfig default_config()
{
    RunConfig rc;
    rc.sweep.axis = SweepAxis::pilot_length;
    rc.sweep.values = {4};
    rc.methods = all_methods();
    return rc;
}

RunConfig preset_config(const std::string &name)
{
    RunConfig rc = default_config();
    rc.preset = name;
    const std::vector<Method> accuracy{Method::charm, Method::charm_norefine, Method::omp3d, Method::lmmse,
                                       Method::kron_omp};
    if (name == "fig2")
    {
        rc.sweep = {SweepAxis::pilot_length, range(2, 8, 1), {}};
        rc.methods = accuracy;
    }
    else if (name == "fig3")
    {
        rc.sweep = {SweepAxis::snr, range(-15, 30, 5), {}};
        rc.methods = accuracy;
    }
    else if (name == "fig4")
    {
        rc.sweep = {SweepAxis::bias, range(0.0, 0.2, 0.02), {}};
        rc.methods = {Method::charm, Method::charm_trust, Method::charm_norefine, Method::omp3d};
    }
    else if (name == "fig5")
    {
        rc.sweep = {SweepAxis::pilot_length, range(2, 8, 1), {}};
        rc.methods = {Method::charm, Method::charm_norefine, Method::omp3d, Method::kron_omp};
    }
    else if (name == "table1")
    {
        rc.sweep = {SweepAxis::pilot_length, {4}, {}};
        rc.methods = all_methods();
    }
    else
    {
        std::string list;
        for (const auto &n : preset_names())
            list += (list.empty() ? "" : ", ") + n;
        throw ConfigError("unknown preset '" + name + "'; valid presets: " + list);
    }
    return rc;
}

void apply_run_config(RunConfig &rc, const std::string &text, const std::optional<std::string> &preset_override)
{
    json doc;
    try
    {
        doc = json::parse(text, nullptr, true, true);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError(std::string("config: ") + e.what());
    }
    reject_unknown(doc, "",
                   {"preset", "jobs", "pilots", "methods", "system", "scenario", "estimator", "omp", "lmmse", "sweep",
                    "output"});

    std::string preset;
    const bool from_file = read(doc, "preset", preset, "config");
    if (preset_override)
        preset = *preset_override;
    if (from_file || preset_override)
    {
        RunConfig p = preset_config(preset);
        rc.sweep = p.sweep;
        rc.methods = p.methods;
        rc.preset = p.preset;
    }
    auto &exp = rc.experiment;
    read(doc, "jobs", exp.jobs, "config");
    std::string pilots;
    if (read(doc, "pilots", pilots, "config"))
    {
        if (pilots == "evenly_spaced")
            exp.pilot_mode = PilotMode::evenly_spaced;
        else if (pilots == "seeded_random")
            exp.pilot_mode = PilotMode::seeded_random;
        else
            throw ConfigError("config: pilots must be 'evenly_spaced' or 'seeded_random'");
    }
    if (const auto it = doc.find("methods"); it != doc.end())
    {
        std::vector<std::string> names;
        read(doc, "methods", names, "config");
        rc.methods.clear();
        for (const auto &n : names)
            rc.methods.push_back(parse_method(n));
    }
    if (const auto it = doc.find("system"); it != doc.end())
        apply_system(exp.system, *it);
    if (const auto it = doc.find("scenario"); it != doc.end())
        apply_scenario(exp.scenario, *it);
    if (const auto it = doc.find("estimator"); it != doc.end())
    {
        reject_unknown(*it, "estimator", {"tikhonov_lambda", "condition_threshold", "threshold_db"});
        read(*it, "tikhonov_lambda", exp.estimator.tikhonov_lambda, "estimator");
        read(*it, "condition_threshold", exp.estimator.condition_threshold, "estimator");
        read(*it, "threshold_db", exp.threshold_db, "estimator");
    }
    if (const auto it = doc.find("omp"); it != doc.end())
    {
        reject_unknown(*it, "omp", {"max_iterations", "floor_scale"});
        read(*it, "max_iterations", exp.omp.max_iterations, "omp");
        read(*it, "floor_scale", exp.omp.floor_scale, "omp");
    }
    if (const auto it = doc.find("lmmse"); it != doc.end())
    {
        reject_unknown(*it, "lmmse", {"training_set_size", "covariance"});
        read(*it, "training_set_size", exp.lmmse.training_set_size, "lmmse");
        std::string source;
        if (read(*it, "covariance", source, "lmmse"))
        {
            if (source == "sample")
                exp.lmmse.source = CovarianceSource::sample;
            else if (source == "oracle")
                exp.lmmse.source = CovarianceSource::oracle;
            else
                throw ConfigError("config: lmmse.covariance must be 'sample' or 'oracle'");
        }
    }
    if (const auto it = doc.find("sweep"); it != doc.end())
        apply_sweep(rc.sweep, *it);
    if (const auto it = doc.find("output"); it != doc.end())
    {
        reject_unknown(*it, "output", {"results", "scenarios"});
        std::string path;
        if (read(*it, "results", path, "output"))
            rc.results = path;
        if (read(*it, "scenarios", path, "output"))
            rc.scenarios = path;
    }
}

RunConfig parse_run_config(const std::string &text, const std::optional<std::string> &preset_override)
{
    RunConfig rc = default_config();
    apply_run_config(rc, text, preset_override);
    return rc;
}

RunConfig load_run_config(const std::filesystem::path &file, const std::optional<std::string> &preset_override)
{
    return parse_run_config(read_text_file(file), preset_override);
}

std::filesystem::path default_output_dir()
{
    if (const char *dir = std::getenv("CHARM_OUT_DIR"); dir && *dir)
        return dir;
    return std::filesystem::current_path();
}

SweepAxis figure_axis(const std::string &figure)
{
    if (figure == "fig2" || figure == "fig5")
        return SweepAxis::pilot_length;
    if (figure == "fig3")
        return SweepAxis::snr;
    if (figure == "fig4")
        return SweepAxis::bias;
    throw ConfigError("unknown figure '" + figure + "'; valid figures: fig2, fig3, fig4, fig5");
}

bool figure_plots_runtime(const std::string &figure)
{
    return figure == "fig5";
}

} // namespace charm::cli
