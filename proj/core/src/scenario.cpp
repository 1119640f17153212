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

#include "charm/scenario.hpp"
#include "charm/error.hpp"
#include "charm/seed.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace charm
{

void ScenarioConfig::validate(const SystemConfig &cfg) const
{
    if (n_locations < 1)
        throw ConfigError("ScenarioConfig: n_locations must be >= 1");
    if (trials_per_location < 1)
        throw ConfigError("ScenarioConfig: trials_per_location must be >= 1");
    if (path_count_min < 1 || path_count_max < path_count_min)
        throw ConfigError("ScenarioConfig: path count range must satisfy 1 <= min <= max");
    if (path_count_max > cfg.max_paths)
        throw ConfigError("ScenarioConfig: path_count_max exceeds the MultipathSet cap");
    if (!(aoa_max > 0.0 && aoa_max < pi / 2) || !(aod_max > 0.0 && aod_max < pi / 2))
        throw ConfigError("ScenarioConfig: angle ranges must lie in (0, pi/2)");
    if (!(delay_min_fraction >= 0.0) || !(delay_max_fraction >= delay_min_fraction) || !(delay_max_fraction < 1.0))
        throw ConfigError("ScenarioConfig: delay range must satisfy 0 <= min <= max < 1 symbol period");
    if (!(tau_rms_fraction > 0.0))
        throw ConfigError("ScenarioConfig: tau_rms must be positive");
}

void MismatchConfig::validate() const
{
    if (!(bias_std >= 0.0) || !std::isfinite(bias_std))
        throw ConfigError("MismatchConfig: bias_std must be finite and >= 0");
}

std::uint64_t location_seed(const ScenarioConfig &scfg, int location)
{
    return derive_seed({scfg.master_seed, 0x4c4f43ULL, static_cast<std::uint64_t>(location)});
}

namespace
{

// asin(u), nudged by a few ulps so that sin() of the result reproduces u exactly when possible.
double angle_for_sin(double u)
{
    const double base = std::asin(u);
    double best = base;
    double best_err = std::abs(std::sin(base) - u);
    for (double dir : {1.0, -1.0})
    {
        double a = base;
        for (int step = 0; step < 8 && best_err > 0.0; ++step)
        {
            a = std::nextafter(a, dir * 4.0);
            const double err = std::abs(std::sin(a) - u);
            if (err < best_err)
            {
                best = a;
                best_err = err;
            }
        }
    }
    return best;
}

} // namespace

MultipathSet snap_to_grid(const SystemConfig &cfg, const MultipathSet &paths)
{
    auto snap_u = [](double u, int size) {
        const int idx = std::clamp(static_cast<int>(std::lround((u + 1.0) * size / 2.0)), 0, size - 1);
        return -1.0 + 2.0 * idx / size;
    };
    MultipathSet out = paths;
    for (auto &p : out.paths)
    {
        p.aoa = angle_for_sin(snap_u(std::sin(p.aoa), cfg.g_theta));
        p.aod = angle_for_sin(snap_u(std::sin(p.aod), cfg.g_phi));
        const int j = std::clamp(static_cast<int>(std::lround(p.delay / cfg.delay_resolution())), 0, cfg.g_tau - 1);
        p.delay = cfg.delay_grid(j);
    }
    return out;
}

Location generate_location(const SystemConfig &cfg, const ScenarioConfig &scfg, std::uint64_t seed, int id)
{
    cfg.validate();
    scfg.validate(cfg);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count(scfg.path_count_min, scfg.path_count_max);
    std::uniform_real_distribution<double> aoa(-scfg.aoa_max, scfg.aoa_max);
    std::uniform_real_distribution<double> aod(-scfg.aod_max, scfg.aod_max);
    const double period = cfg.symbol_period();
    std::uniform_real_distribution<double> delay(scfg.delay_min_fraction * period, scfg.delay_max_fraction * period);
    std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));
    const double tau_rms = scfg.tau_rms_fraction * period;

    Location loc;
    loc.id = id;
    loc.seed = seed;
    const int n_paths = count(rng);
    loc.truth.paths.resize(n_paths);
    double energy = 0.0;
    for (auto &p : loc.truth.paths)
    {
        p.aoa = aoa(rng);
        p.aod = aod(rng);
        p.delay = delay(rng);
        const double re = gauss(rng);
        const double im = gauss(rng);
        p.gain = cdouble(re, im) * std::exp(-p.delay / (2.0 * tau_rms));
        energy += std::norm(p.gain);
    }
    const double scale = 1.0 / std::sqrt(energy);
    for (auto &p : loc.truth.paths)
        p.gain *= scale;
    if (scfg.on_grid)
        loc.truth = snap_to_grid(cfg, loc.truth);
    loc.radio_map = loc.truth;
    return loc;
}

MultipathSet inject_bias(const MultipathSet &radio_map, const MismatchConfig &mcfg, std::uint64_t seed)
{
    mcfg.validate();
    if (mcfg.bias_std == 0.0)
        return radio_map;
    constexpr double edge = 1.0 - 1e-6;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MultipathSet out = radio_map;
    for (auto &p : out.paths)
    {
        const double u = std::clamp(std::sin(p.aoa) + mcfg.bias_std * gauss(rng), -edge, edge);
        p.aoa = std::asin(u);
    }
    return out;
}

} // namespace charm
