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

#include "charm/estimator.hpp"
#include "charm/error.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace charm
{

namespace
{

using clock_type = std::chrono::steady_clock;

double elapsed_ms(clock_type::time_point start)
{
    return std::chrono::duration<double, std::milli>(clock_type::now() - start).count();
}

} // namespace

void EstimatorConfig::validate() const
{
    if (!(tikhonov_lambda > 0.0))
        throw ConfigError("EstimatorConfig: tikhonov_lambda must be > 0");
    if (!(condition_threshold > 1.0))
        throw ConfigError("EstimatorConfig: condition_threshold must be > 1");
}

AodDictionary AodDictionary::build(const SystemConfig &cfg, const PilotMatrix &x)
{
    if (x.x.rows() != cfg.n_tx)
        throw ConfigError("AodDictionary: pilot matrix row count differs from n_tx");
    CMatrix atoms(cfg.n_tx, cfg.g_phi);
    for (int g = 0; g < cfg.g_phi; ++g)
        atoms.col(g) = steering_vector_sin(cfg.n_tx, cfg.aod_grid_u(g));
    AodDictionary dict;
    // u_g[t] = a_t(phi_g)^H x_t, the response that y = H x actually carries.
    dict.u.noalias() = x.x.transpose() * atoms.conjugate();
    dict.norm2 = dict.u.colwise().squaredNorm().transpose();
    return dict;
}

ProjectionMatrix build_projection(const SystemConfig &cfg, const PathSupport &support, const EstimatorConfig &ecfg)
{
    ecfg.validate();
    const auto n_paths = static_cast<Eigen::Index>(support.size());
    if (n_paths < 1)
        throw NumericError("build_projection: empty support");
    if (n_paths > cfg.n_rx)
        throw ConfigError("build_projection: support length exceeds n_rx");

    CMatrix a_rx(cfg.n_rx, n_paths);
    for (Eigen::Index l = 0; l < n_paths; ++l)
        a_rx.col(l) = steering_vector_sin(cfg.n_rx, support.peaks[l].u_hat);
    const CMatrix gram = a_rx.adjoint() * a_rx;

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();

    ProjectionMatrix out;
    out.condition_number = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    if (out.condition_number <= ecfg.condition_threshold)
    {
        out.w = gram.ldlt().solve(a_rx.adjoint());
        return out;
    }

    Eigen::VectorXd penalty(n_paths);
    for (Eigen::Index l = 0; l < n_paths; ++l)
    {
        const double p = support.peaks[l].power;
        if (!(p > 0.0))
            throw NumericError("build_projection: nonpositive peak power in regularized branch");
        penalty[l] = ecfg.tikhonov_lambda / p;
    }
    CMatrix reg = gram;
    reg.diagonal() += penalty.cast<cdouble>();
    Eigen::SelfAdjointEigenSolver<CMatrix> reg_eig(reg, Eigen::EigenvaluesOnly);
    const double reg_lo = reg_eig.eigenvalues().minCoeff();
    const double reg_hi = reg_eig.eigenvalues().maxCoeff();
    if (!(reg_lo > 1e-14 * reg_hi))
        throw NumericError("build_projection: regularized Gram matrix is singular (kappa=" +
                           std::to_string(out.condition_number) + ")");
    out.w = reg.ldlt().solve(a_rx.adjoint());
    out.regularized = true;
    return out;
}

CMatrix project_and_compensate(const SystemConfig &cfg, const RxObservations &y, const ProjectionMatrix &w,
                               const PathSupport &support)
{
    const auto n_paths = static_cast<Eigen::Index>(support.size());
    if (w.w.rows() != n_paths || w.w.cols() != cfg.n_rx)
        throw ConfigError("project_and_compensate: projection does not match support/n_rx");
    if (y.n_subcarriers() != cfg.n_subcarriers)
        throw ConfigError("project_and_compensate: observation subcarrier count mismatch");

    const int n_pilots = y.pilot_length();
    CMatrix zbar = CMatrix::Zero(n_paths, n_pilots);
    CMatrix z(n_paths, n_pilots);
    CVector phase(n_paths);
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        for (Eigen::Index l = 0; l < n_paths; ++l)
            phase[l] = std::polar(1.0, 2.0 * pi * k * cfg.subcarrier_spacing * support.peaks[l].tau_hat);
        z.noalias() = w.w * y.y[k];
        zbar.noalias() += phase.asDiagonal() * z;
    }
    zbar /= static_cast<double>(cfg.n_subcarriers);
    return zbar;
}

PathEstimate aod_search(const CVector &zbar, const AodDictionary &dict, const SystemConfig &cfg)
{
    if (zbar.size() != dict.u.rows())
        throw ConfigError("aod_search: observation length differs from pilot length");
    const CVector corr = dict.u.adjoint() * zbar;
    int best = -1;
    double best_metric = -1.0;
    for (int g = 0; g < static_cast<int>(corr.size()); ++g)
    {
        if (dict.excluded(g))
            continue;
        // Metrics within rounding of the incumbent count as ties and keep the lower index.
        const double metric = std::norm(corr[g]) / dict.norm2[g];
        if (metric > best_metric * (1.0 + 1e-12))
        {
            best_metric = metric;
            best = g;
        }
    }
    if (best < 0)
        throw NumericError("aod_search: every AoD atom is invisible to the pilot matrix");

    PathEstimate est;
    est.aod_index = best;
    est.u_aod = cfg.aod_grid_u(best);
    est.aod = std::asin(est.u_aod);
    est.gain = corr[best] / dict.norm2[best];
    return est;
}

PathEstimate aod_search(const SystemConfig &cfg, const CVector &zbar, const PilotMatrix &x,
                        const EstimatorConfig &ecfg)
{
    ecfg.validate();
    return aod_search(zbar, AodDictionary::build(cfg, x), cfg);
}

ChannelTensor reconstruct(const SystemConfig &cfg, const std::vector<PathEstimate> &paths)
{
    if (paths.empty())
        throw ConfigError("reconstruct: no path estimates");
    const auto n_paths = static_cast<Eigen::Index>(paths.size());
    CMatrix a_rx(cfg.n_rx, n_paths);
    CMatrix a_tx_h(n_paths, cfg.n_tx);
    for (Eigen::Index l = 0; l < n_paths; ++l)
    {
        a_rx.col(l) = steering_vector_sin(cfg.n_rx, paths[l].u_aoa);
        a_tx_h.row(l) = steering_vector_sin(cfg.n_tx, paths[l].u_aod).adjoint();
    }

    ChannelTensor out;
    out.h.resize(cfg.n_subcarriers);
    CMatrix weighted(cfg.n_rx, n_paths);
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        for (Eigen::Index l = 0; l < n_paths; ++l)
            weighted.col(l) =
                a_rx.col(l) * (paths[l].gain * std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * paths[l].delay));
        out.h[k].noalias() = weighted * a_tx_h;
    }
    return out;
}

EstimateResult charm_estimate(const SystemConfig &cfg, const EstimatorConfig &ecfg, const PathSupport &support,
                              const RxObservations &y, const PilotMatrix &x)
{
    if (support.empty())
        throw NumericError("charm_estimate: empty support");
    const auto start = clock_type::now();

    EstimateResult result;
    const ProjectionMatrix w = build_projection(cfg, support, ecfg);
    const CMatrix zbar = project_and_compensate(cfg, y, w, support);
    const AodDictionary dict = AodDictionary::build(cfg, x);

    result.paths.reserve(support.size());
    for (std::size_t l = 0; l < support.size(); ++l)
    {
        PathEstimate est = aod_search(zbar.row(static_cast<Eigen::Index>(l)).transpose(), dict, cfg);
        est.u_aoa = support.peaks[l].u_hat;
        est.delay = support.peaks[l].tau_hat;
        result.paths.push_back(est);
    }
    result.h_hat = reconstruct(cfg, result.paths);
    result.online_ms = elapsed_ms(start);

    result.condition_number = w.condition_number;
    result.regularized = w.regularized;
    result.support_size = static_cast<int>(support.size());
    result.projected_noise_variance.resize(support.size());
    for (std::size_t l = 0; l < support.size(); ++l)
        result.projected_noise_variance[l] = w.w.row(static_cast<Eigen::Index>(l)).squaredNorm() * y.noise_variance;
    return result;
}

EstimateResult charm_estimate(const SystemConfig &cfg, const EstimatorConfig &ecfg, const MultipathSet &radio_map,
                              const RxObservations &y, const PilotMatrix &x, const SupportOptions &options)
{
    const auto start = clock_type::now();
    const PathSupport support = extract_support(cfg, radio_map, options);
    const double offline = elapsed_ms(start);
    EstimateResult result = charm_estimate(cfg, ecfg, support, y, x);
    result.offline_ms = offline;
    return result;
}

} // namespace charm
