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
#include "charm/estimator.hpp"

#include <span>
#include <vector>

namespace charm
{

struct Omp3dConfig
{
    int max_iterations = 0;   // 0 selects min(n_rx, 16)
    double floor_scale = 1.0; // stop once residual energy <= floor_scale * (observations) * sigma^2

    int resolved_iterations(const SystemConfig &cfg) const;
};

// Atom scores for the joint (AoA, AoD, delay) dictionary, computed through the
// separable factorization: receive correlations, a delay-domain transform across
// subcarriers, then the pilot-side correlation.
class Omp3dScorer
{
public:
    Omp3dScorer(const SystemConfig &cfg, const PilotMatrix &x);

    struct Best
    {
        int i = -1; // AoA bin
        int g = -1; // AoD bin
        int j = -1; // delay bin
        double score = -1.0;
    };

    // Normalized correlation |<response, residual>|^2 / ||response||^2 of the best atom.
    Best best(const std::vector<CMatrix> &residual) const;

    // Every atom score, flattened as i + g_theta * (g + g_phi * j). Excluded atoms score 0.
    std::vector<double> scores(const std::vector<CMatrix> &residual) const;

    // Atom response over (k, t, rx), k outermost.
    CVector response(int i, int g, int j) const;

    const AodDictionary &aod() const { return aod_; }

private:
    template <class Visit> void visit_scores(const std::vector<CMatrix> &residual, Visit &&visit) const;

    SystemConfig cfg_;
    int pilots_;
    CMatrix rx_atoms_;  // n_rx x g_theta
    CMatrix delay_fwd_; // K x g_tau, exp(+j 2 pi k df tau_j)
    AodDictionary aod_;
    CMatrix aod_conj_;  // T x g_phi
    Eigen::VectorXd inv_norm_;
};

struct OmpTrace
{
    std::vector<Omp3dScorer::Best> atoms;
    std::vector<double> residual_energy; // before the first and after every accepted iteration
    CMatrix responses;                   // accepted atom responses as columns
    CVector residual;                    // final residual, same flattening as the responses
};

EstimateResult joint_omp_3d(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                            const Omp3dConfig &ocfg = {}, OmpTrace *trace = nullptr);

// Per-subcarrier OMP over the angle-only dictionary, no delay axis.
EstimateResult kron_omp(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                        const Omp3dConfig &ocfg = {});

enum class CovarianceSource
{
    sample, // generator training draws
    oracle, // the trial's own ground truth
};

struct LmmseConfig
{
    int training_set_size = 500;
    CovarianceSource source = CovarianceSource::sample;

    void validate(const SystemConfig &cfg) const;
};

// vec(H) covariance modelled as r_tx^T (x) r_rx, with tr(r_tx) = 1.
struct KronCovariance
{
    CMatrix r_tx; // n_tx x n_tx
    CMatrix r_rx; // n_rx x n_rx
};

// Subcarrier-averaged sample covariances of the channels the path sets synthesize,
// evaluated in closed form from the path parameters.
KronCovariance sample_kron_covariance(const SystemConfig &cfg, std::span<const MultipathSet> training);

EstimateResult lmmse_kron(const SystemConfig &cfg, const RxObservations &y, const PilotMatrix &x,
                          const KronCovariance &cov);

} // namespace charm
