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

#pragma once

#include "charm/sweep.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace charm::cli
{

// Everything a `run` needs. Built in layers: defaults, preset, config file, command-line flags.
struct RunConfig
{
    ExperimentConfig experiment;
    SweepSpec sweep;
    std::vector<Method> methods;
    std::string preset;               // empty when no preset was applied
    std::filesystem::path results;    // output CSV, empty selects the default location
    std::filesystem::path scenarios;  // scenario directory, empty generates locations in memory
};

const std::vector<std::string> &preset_names();

// Throws ConfigError naming the valid presets.
RunConfig preset_config(const std::string &name);

// Defaults: table1 operating point with every method.
RunConfig default_config();

// JSON with comments. Unknown keys throw ConfigError. A preset (the override, else the "preset" key) is
// applied before the other keys.
RunConfig parse_run_config(const std::string &text, const std::optional<std::string> &preset_override = {});
RunConfig load_run_config(const std::filesystem::path &file, const std::optional<std::string> &preset_override = {});

// Overlays the keys of `text` onto `base`.
void apply_run_config(RunConfig &base, const std::string &text,
                      const std::optional<std::string> &preset_override = {});

// Output directory from CHARM_OUT_DIR, else the working directory.
std::filesystem::path default_output_dir();

// Figure name to the axis of its plot data; fig5 plots runtime.
SweepAxis figure_axis(const std::string &figure);
bool figure_plots_runtime(const std::string &figure);

} // namespace charm::cli
