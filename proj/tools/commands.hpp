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

#include "run_config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>

namespace charm::cli
{

struct GenOptions
{
    std::optional<std::filesystem::path> config;
    std::filesystem::path out;
    std::optional<std::uint64_t> seed;
    std::optional<int> locations;
    bool on_grid = false;
};

struct RunOptions
{
    std::optional<std::filesystem::path> config;
    std::optional<std::string> preset;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::filesystem::path> scenarios;
    std::optional<std::string> methods;
    std::optional<int> locations;
    bool on_grid = false;
};

struct ReportOptions
{
    std::filesystem::path in;
    std::optional<std::string> figure;
    bool table = false;
    std::optional<std::filesystem::path> out;
};

// Layers config file, preset and flags; validates the result.
RunConfig resolve_run_config(const RunOptions &opts);

void cmd_gen(const GenOptions &opts, std::ostream &log);
std::filesystem::path cmd_run(const RunOptions &opts, std::ostream &log);
void cmd_report(const ReportOptions &opts, std::ostream &log);

// One block per operating point: NMSE (dB of mean linear and mean of dB), median runtime, speedup over omp3d.
std::string format_table(std::span<const TrialRecord> records);

// Whitespace-separated columns: x, then one column per method in order of first appearance.
std::string plot_data(std::span<const TrialRecord> records, const std::string &figure);
std::string gnuplot_script(const std::string &figure, const std::string &data_file,
                           std::span<const std::string> methods);

} // namespace charm::cli
