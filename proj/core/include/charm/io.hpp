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

#include "charm/adps.hpp"
#include "charm/scenario.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace charm
{

// On-disk formats. All are JSON objects carrying a "schema" string:
//
//   charm.scenario/1  {"schema", "location", "seed",
//                      "paths": [{"gain": [re, im], "aoa", "aod", "delay"}, ...]}
//                     angles in radians, delays in seconds; the radio map equals the paths.
//   charm.support/1   {"schema", "refined", "trust_clipped",
//                      "peaks": [{"i", "j", "u_grid", "tau_grid", "u_ref", "tau_ref",
//                                 "u_hat", "tau_hat", "power"}, ...]}
//   charm.manifest/1  {"schema", "master_seed", "locations": [{"id", "seed", "file", "paths"}]}
//
// Doubles are written with round-trip precision, so load(save(x)) == x.

inline constexpr const char *scenario_schema = "charm.scenario/1";
inline constexpr const char *support_schema = "charm.support/1";
inline constexpr const char *manifest_schema = "charm.manifest/1";

std::string scenario_to_string(const Location &loc);
Location scenario_from_string(const std::string &text);

void save_scenario(const std::filesystem::path &file, const Location &loc);
Location load_scenario(const std::filesystem::path &file);

std::string support_to_string(const PathSupport &support);
PathSupport support_from_string(const std::string &text);

void save_support(const std::filesystem::path &file, const PathSupport &support);
PathSupport load_support(const std::filesystem::path &file);

struct ManifestEntry
{
    int id = 0;
    std::uint64_t seed = 0;
    std::string file;
    int paths = 0;
};

void save_manifest(const std::filesystem::path &file, std::uint64_t master_seed,
                   const std::vector<ManifestEntry> &entries);

// Loads every scenario listed in a directory's manifest.json, in manifest order.
std::vector<Location> load_scenario_directory(const std::filesystem::path &dir);

std::string read_text_file(const std::filesystem::path &file);
void write_text_file(const std::filesystem::path &file, const std::string &text);

} // namespace charm
