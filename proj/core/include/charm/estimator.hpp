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
#include "charm/channel.hpp"

#include <vector>

namespace charm
{

struct EstimatorConfig
{
    double tikhonov_lambda = 1e-2;
    double condition_threshold = 100.0; // switch to the regularized projection above this

    void validate() const;
};

struct ProjectionMatrix
{
    CMatrix w; // L x n_rx
    bool regularized = false;
    double condition_number = 0.0; // 2-norm condition number of A_r^H A_r
};

struct PathEstimate
{
    int aod_index = 0;
    double u_aod = 0.0;
    double aod = 0.0;
    cdouble gain;
    double u_aoa = 0.0; // inherited from the support
    double delay = 0.0;
};

struct EstimateResult
{
    ChannelTensor h_hat;
    std::vector<PathEstimate> paths;
    double online_ms = 0.0;
    double offline_ms = 0.0;
    double condition_number = 0.0;
    bool regularized = false;
    int support_size = 0;
    std::vector<double> projected_noise_variance; // ||w_l||^2 sigma^2 per support row
};

// AoD dictionary responses u_g[t] = a_t(phi_g)^H x_t for every atom g, with squared norms.
struct AodDictionary
{
    CMatrix u;              // T x g_phi
    Eigen::VectorXd norm2;  // ||u_g||^2
    double exclusion = 1e-12;

    static AodDictionary build(const SystemConfig &cfg, const PilotMatrix &x);
    bool excluded(int g) const { return norm2[g] < exclusion; }
};

ProjectionMatrix build_projection(const SystemConfig &cfg, const PathSupport &support, const EstimatorConfig &ecfg);

// Per-path subcarrier-averaged pilot-domain observations (L x T).
CMatrix project_and_compensate(const SystemConfig &cfg, const RxObservations &y, const ProjectionMatrix &w,
                               const PathSupport &support);

// Correlation search over the sin-uniform AoD grid for one row of the projected observations.
PathEstimate aod_search(const SystemConfig &cfg, const CVector &zbar, const PilotMatrix &x,
                        const EstimatorConfig &ecfg);
PathEstimate aod_search(const CVector &zbar, const AodDictionary &dict, const SystemConfig &cfg);

// Sum of rank-one path terms; the same kernel as synthesize_channel.
ChannelTensor reconstruct(const SystemConfig &cfg, const std::vector<PathEstimate> &paths);

// Online phase only, from an already extracted support. The wall time lands in online_ms.
EstimateResult charm_estimate(const SystemConfig &cfg, const EstimatorConfig &ecfg, const PathSupport &support,
                              const RxObservations &y, const PilotMatrix &x);

// Full pipeline: offline support extraction (timed into offline_ms) followed by the online phase.
EstimateResult charm_estimate(const SystemConfig &cfg, const EstimatorConfig &ecfg, const MultipathSet &radio_map,
                              const RxObservations &y, const PilotMatrix &x, const SupportOptions &options = {});

} // namespace charm
