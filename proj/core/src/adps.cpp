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

#include "charm/adps.hpp"
#include "charm/error.hpp"

#include <algorithm>
#include <cmath>

namespace charm
{

int default_max_paths(const SystemConfig &cfg)
{
    return std::min(cfg.n_rx, 16);
}

double dirichlet(int n, double x)
{
    x -= std::round(x);
    if (std::abs(x) < 1e-12)
        return 1.0;
    const double value = std::abs(std::sin(pi * n * x) / (n * std::sin(pi * x)));
    return std::min(value, 1.0);
}

double dirichlet_k(const SystemConfig &cfg, double tau)
{
    if (!std::isfinite(tau))
        throw ConfigError("dirichlet_k: non-finite delay");
    return dirichlet(cfg.n_subcarriers, cfg.subcarrier_spacing * tau);
}

AdpsGrid build_adps(const SystemConfig &cfg, const MultipathSet &radio_map)
{
    cfg.validate();
    if (radio_map.empty())
        throw ConfigError("build_adps: empty radio map");

    const auto n_paths = static_cast<Eigen::Index>(radio_map.size());
    AdpsGrid grid;
    grid.delta_u = cfg.aoa_spacing();
    grid.delta_tau = cfg.delay_resolution();

    // P = S diag(|alpha|^2) D^T with S the spatial and D the delay kernel.
    Eigen::MatrixXd spatial(cfg.g_theta, n_paths);
    Eigen::MatrixXd delay(cfg.g_tau, n_paths);
    Eigen::VectorXd weight(n_paths);
    for (Eigen::Index l = 0; l < n_paths; ++l)
    {
        const auto &p = radio_map.paths[l];
        const double u_path = std::sin(p.aoa);
        for (int i = 0; i < cfg.g_theta; ++i)
        {
            const double d = dirichlet(cfg.n_rx, 0.5 * (u_path - cfg.aoa_grid_u(i)));
            spatial(i, l) = d * d;
        }
        for (int j = 0; j < cfg.g_tau; ++j)
        {
            const double d = dirichlet_k(cfg, cfg.delay_grid(j) - p.delay);
            delay(j, l) = d * d;
        }
        weight[l] = std::norm(p.gain);
    }
    grid.power.noalias() = spatial * weight.asDiagonal() * delay.transpose();
    return grid;
}

PathSupport extract_peaks(const AdpsGrid &grid, double threshold_db, int l_max)
{
    if (l_max < 1)
        throw ConfigError("extract_peaks: l_max must be >= 1");
    const int rows = grid.g_theta();
    const int cols = grid.g_tau();
    const double global_max = rows > 0 && cols > 0 ? grid.power.maxCoeff() : 0.0;
    if (!(global_max > 0.0))
        throw NumericError("extract_peaks: empty support (ADPS has no positive power)");

    const double floor = global_max * std::pow(10.0, -threshold_db / 10.0);
    PathSupport support;
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i)
        {
            const double p = grid.power(i, j);
            if (!(p > floor))
                continue;
            bool dominant = true;
            for (int di = -1; di <= 1 && dominant; ++di)
                for (int dj = -1; dj <= 1; ++dj)
                {
                    const int ni = i + di;
                    const int nj = j + dj;
                    if ((di == 0 && dj == 0) || ni < 0 || nj < 0 || ni >= rows || nj >= cols)
                        continue;
                    if (grid.power(ni, nj) > p)
                    {
                        dominant = false;
                        break;
                    }
                }
            if (!dominant)
                continue;
            PeakRecord rec;
            rec.i = i;
            rec.j = j;
            rec.u_grid = grid.u(i);
            rec.theta_grid = std::asin(std::clamp(rec.u_grid, -1.0, 1.0));
            rec.tau_grid = grid.tau(j);
            rec.u_ref = rec.u_hat = rec.u_grid;
            rec.tau_ref = rec.tau_hat = rec.tau_grid;
            rec.power = p;
            support.peaks.push_back(rec);
        }

    std::sort(support.peaks.begin(), support.peaks.end(), [](const PeakRecord &a, const PeakRecord &b) {
        if (a.power != b.power)
            return a.power > b.power;
        if (a.i != b.i)
            return a.i < b.i;
        return a.j < b.j;
    });
    if (static_cast<int>(support.peaks.size()) > l_max)
        support.peaks.resize(l_max);
    return support;
}

double parabolic_offset(double prev, double center, double next, double spacing)
{
    // Written as sums of the two neighbour differences so that |num| <= |den|
    // survives rounding whenever the center dominates.
    const double a = prev - center;
    const double c = next - center;
    const double den = a + c;
    const double num = a - c;
    if (den == 0.0 || std::abs(den) < 1e-12 * std::abs(center))
        return 0.0;
    return 0.5 * (num / den) * spacing;
}

double parabolic_refine(double prev, double center, double next, double spacing)
{
    if (!(center >= prev) || !(center >= next))
        throw ConfigError("parabolic_refine: center sample is not a local maximum");
    return parabolic_offset(prev, center, next, spacing);
}

std::pair<double, double> trust_clip(double u_ref, double tau_ref, double u_grid, double tau_grid, double delta_u,
                                     double delta_tau)
{
    const double hu = 0.5 * delta_u;
    const double ht = 0.5 * delta_tau;
    return {std::clamp(u_ref, u_grid - hu, u_grid + hu), std::clamp(tau_ref, tau_grid - ht, tau_grid + ht)};
}

namespace
{

PathSupport refine_support(PathSupport support, const AdpsGrid &values, bool checked, const SupportOptions &options)
{
    const int rows = values.g_theta();
    const int cols = values.g_tau();
    for (auto &pk : support.peaks)
    {
        double du = 0.0;
        double dt = 0.0;
        if (options.refine)
        {
            const auto offset = checked ? parabolic_refine : parabolic_offset;
            if (pk.i > 0 && pk.i < rows - 1)
                du = offset(values.power(pk.i - 1, pk.j), values.power(pk.i, pk.j), values.power(pk.i + 1, pk.j),
                            values.delta_u);
            if (pk.j > 0 && pk.j < cols - 1)
                dt = offset(values.power(pk.i, pk.j - 1), values.power(pk.i, pk.j), values.power(pk.i, pk.j + 1),
                            values.delta_tau);
        }
        pk.u_ref = std::clamp(pk.u_grid + du, -1.0, 1.0);
        pk.tau_ref = pk.tau_grid + dt;
        if (options.trust)
        {
            const auto [u, tau] = trust_clip(pk.u_ref, pk.tau_ref, pk.u_grid, pk.tau_grid, values.delta_u,
                                             values.delta_tau);
            pk.u_hat = u;
            pk.tau_hat = tau;
        }
        else
        {
            pk.u_hat = pk.u_ref;
            pk.tau_hat = pk.tau_ref;
        }
    }
    support.refined = options.refine;
    support.trust_clipped = options.trust;
    return support;
}

int resolved_max_paths(const SystemConfig &cfg, const SupportOptions &options)
{
    return options.max_paths > 0 ? options.max_paths : default_max_paths(cfg);
}

} // namespace

PathSupport extract_support(const SystemConfig &cfg, const MultipathSet &radio_map, const SupportOptions &options)
{
    const AdpsGrid grid = build_adps(cfg, radio_map);
    auto peaks = extract_peaks(grid, options.threshold_db, resolved_max_paths(cfg, options));
    return refine_support(std::move(peaks), grid, true, options);
}

PathSupport extract_support(const SystemConfig &cfg, const MultipathSet &detection_map,
                            const MultipathSet &refinement_map, const SupportOptions &options)
{
    if (&detection_map == &refinement_map || detection_map == refinement_map)
        return extract_support(cfg, detection_map, options);
    const AdpsGrid detection = build_adps(cfg, detection_map);
    auto peaks = extract_peaks(detection, options.threshold_db, resolved_max_paths(cfg, options));
    if (!options.refine)
        return refine_support(std::move(peaks), detection, true, options);
    const AdpsGrid refinement = build_adps(cfg, refinement_map);
    return refine_support(std::move(peaks), refinement, false, options);
}

} // namespace charm
