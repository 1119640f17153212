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

#include "charm/channel.hpp"

#include <cstdint>

namespace charm
{

// Statistics of the synthetic multipath generator. Delays are expressed as
// fractions of the OFDM symbol period 1/df so the defaults scale with the numerology.
struct ScenarioConfig
{
    int n_locations = 24;
    int trials_per_location = 8;
    int path_count_min = 4;
    int path_count_max = 12;
    double aoa_max = pi / 3; // angles drawn uniformly in [-max, max]
    double aod_max = pi / 3;
    double delay_min_fraction = 0.0;
    double delay_max_fraction = 0.25;  // 1/(4 df)
    double tau_rms_fraction = 1.0 / 16; // 1/(16 df)
    bool on_grid = false;
    std::uint64_t master_seed = 1;

    void validate(const SystemConfig &cfg) const;
};

struct MismatchConfig
{
    double bias_std = 0.0; // Gaussian perturbation of sin(AoA)

    void validate() const;
};

struct Location
{
    int id = 0;
    std::uint64_t seed = 0;
    MultipathSet truth;
    MultipathSet radio_map; // exact copy of the truth; bias is injected separately
};

std::uint64_t location_seed(const ScenarioConfig &scfg, int location);

Location generate_location(const SystemConfig &cfg, const ScenarioConfig &scfg, std::uint64_t seed, int id = 0);

// Snap a path set to the AoA/AoD/delay dictionaries of `cfg`.
MultipathSet snap_to_grid(const SystemConfig &cfg, const MultipathSet &paths);

// u = sin(AoA) moves by N(0, bias_std^2), clipped to +-(1 - 1e-6). Other fields untouched.
MultipathSet inject_bias(const MultipathSet &radio_map, const MismatchConfig &mcfg, std::uint64_t seed);

} // namespace charm
