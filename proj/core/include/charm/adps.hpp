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

#include <utility>
#include <vector>

namespace charm
{

// Angular-delay power spectrum over (sin-AoA, delay).
// Row i sits at u_i = -1 + 2i/g_theta, column j at tau_j = j/(K df).
struct AdpsGrid
{
    Eigen::MatrixXd power; // g_theta x g_tau, nonnegative
    double delta_u = 0.0;
    double delta_tau = 0.0;

    int g_theta() const { return static_cast<int>(power.rows()); }
    int g_tau() const { return static_cast<int>(power.cols()); }
    double u(int i) const { return -1.0 + delta_u * i; }
    double tau(int j) const { return delta_tau * j; }
};

struct PeakRecord
{
    int i = 0; // AoA bin
    int j = 0; // delay bin
    double theta_grid = 0.0;
    double u_grid = 0.0;
    double tau_grid = 0.0;
    double u_ref = 0.0;
    double tau_ref = 0.0;
    double u_hat = 0.0;
    double tau_hat = 0.0;
    double power = 0.0;

    bool operator==(const PeakRecord &) const = default;
};

// Peaks sorted by power, strongest first.
struct PathSupport
{
    std::vector<PeakRecord> peaks;
    bool refined = false;
    bool trust_clipped = false;

    std::size_t size() const { return peaks.size(); }
    bool empty() const { return peaks.empty(); }

    bool operator==(const PathSupport &) const = default;
};

struct SupportOptions
{
    bool refine = true;
    bool trust = false;
    double threshold_db = 10.0;
    int max_paths = 0; // 0 selects min(n_rx, 16)
};

// min(n_rx, 16)
int default_max_paths(const SystemConfig &cfg);

// |sum_{m<n} exp(j 2 pi m x)| / n, the normalized n-point Dirichlet magnitude.
double dirichlet(int n, double x);

// Delay-domain response of K subcarriers, D_K(tau) with D_K(0) = 1.
double dirichlet_k(const SystemConfig &cfg, double tau);

AdpsGrid build_adps(const SystemConfig &cfg, const MultipathSet &radio_map);

// 3x3 non-maximum suppression above a threshold relative to the global maximum.
// Returned records carry grid values only (ref/hat fields equal the grid values).
PathSupport extract_peaks(const AdpsGrid &grid, double threshold_db, int l_max);

// Fractional peak offset from three samples, in units of `spacing`.
// Throws ConfigError when the middle sample is not a local maximum.
double parabolic_refine(double prev, double center, double next, double spacing);

// Same arithmetic without the peak precondition. A mismatched map can hand the
// interpolator a triple that is not a peak; the offset is then unbounded.
double parabolic_offset(double prev, double center, double next, double spacing);

// Clip a refined (u, tau) into the half-bin box around its grid peak.
std::pair<double, double> trust_clip(double u_ref, double tau_ref, double u_grid, double tau_grid, double delta_u,
                                     double delta_tau);

// ADPS -> peaks -> optional refinement -> optional trust clip, all from one map.
PathSupport extract_support(const SystemConfig &cfg, const MultipathSet &radio_map,
                            const SupportOptions &options = {});

// Mismatch form: peaks are detected on `detection_map`, while the sub-grid refinement
// reads its neighbourhoods from the ADPS of `refinement_map` (a biased copy).
// Identical maps reproduce the single-map overload bit for bit.
PathSupport extract_support(const SystemConfig &cfg, const MultipathSet &detection_map,
                            const MultipathSet &refinement_map, const SupportOptions &options = {});

} // namespace charm
