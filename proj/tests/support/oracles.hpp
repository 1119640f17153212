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

// Scalar reference implementations used as test oracles. They recompute every quantity from the
// defining sums with plain loops and share no code with the library kernels.

#pragma once

#include "charm/channel.hpp"

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace charm::oracle
{

inline cdouble steer(int n, double u, int m)
{
    return std::polar(1.0 / std::sqrt(static_cast<double>(n)), pi * m * u);
}

// H[k](r, c) = sum_l alpha_l e^{-j 2 pi k df tau_l} a_r[r] conj(a_t[c])
inline ChannelTensor channel(const SystemConfig &cfg, const MultipathSet &set)
{
    ChannelTensor h;
    h.h.assign(cfg.n_subcarriers, CMatrix::Zero(cfg.n_rx, cfg.n_tx));
    for (int k = 0; k < cfg.n_subcarriers; ++k)
        for (int r = 0; r < cfg.n_rx; ++r)
            for (int c = 0; c < cfg.n_tx; ++c)
            {
                cdouble acc = 0.0;
                for (const auto &p : set.paths)
                {
                    const cdouble phase = std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * p.delay);
                    acc += p.gain * phase * steer(cfg.n_rx, std::sin(p.aoa), r) *
                           std::conj(steer(cfg.n_tx, std::sin(p.aod), c));
                }
                h.h[k](r, c) = acc;
            }
    return h;
}

// |sum_m e^{j pi m du}|^2 / n^2 and |sum_k e^{-j 2 pi k df dtau}|^2 / K^2, summed explicitly.
inline double spatial_kernel(int n, double du)
{
    cdouble acc = 0.0;
    for (int m = 0; m < n; ++m)
        acc += std::polar(1.0, pi * m * du);
    return std::norm(acc) / (static_cast<double>(n) * n);
}

inline double delay_kernel(const SystemConfig &cfg, double dtau)
{
    cdouble acc = 0.0;
    for (int k = 0; k < cfg.n_subcarriers; ++k)
        acc += std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * dtau);
    return std::norm(acc) / (static_cast<double>(cfg.n_subcarriers) * cfg.n_subcarriers);
}

inline Eigen::MatrixXd adps(const SystemConfig &cfg, const MultipathSet &map)
{
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(cfg.g_theta, cfg.g_tau);
    for (int i = 0; i < cfg.g_theta; ++i)
        for (int j = 0; j < cfg.g_tau; ++j)
            for (const auto &path : map.paths)
                p(i, j) += std::norm(path.gain) * spatial_kernel(cfg.n_rx, std::sin(path.aoa) - cfg.aoa_grid_u(i)) *
                           delay_kernel(cfg, cfg.delay_grid(j) - path.delay);
    return p;
}

// u_g[t] = a_t(phi_g)^H x_t, by explicit summation.
inline cdouble aod_atom(const SystemConfig &cfg, const CMatrix &x, int g, int t)
{
    cdouble acc = 0.0;
    for (int n = 0; n < cfg.n_tx; ++n)
        acc += std::conj(steer(cfg.n_tx, cfg.aod_grid_u(g), n)) * x(n, t);
    return acc;
}

// Naive joint OMP score of atom (i, g, j): build the response over (k, t, rx) and correlate.
inline double omp_score(const SystemConfig &cfg, const CMatrix &x, const std::vector<CMatrix> &residual, int i, int g,
                        int j)
{
    cdouble corr = 0.0;
    double norm2 = 0.0;
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        const cdouble phase = std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * cfg.delay_grid(j));
        for (int t = 0; t < x.cols(); ++t)
        {
            const cdouble u = aod_atom(cfg, x, g, t);
            for (int r = 0; r < cfg.n_rx; ++r)
            {
                const cdouble resp = u * phase * steer(cfg.n_rx, cfg.aoa_grid_u(i), r);
                corr += std::conj(resp) * residual[k](r, t);
                norm2 += std::norm(resp);
            }
        }
    }
    return norm2 < 1e-12 * cfg.n_subcarriers ? 0.0 : std::norm(corr) / norm2;
}

// Paths with parameters drawn uniformly; on-grid draws land exactly on dictionary nodes.
inline MultipathSet random_paths(const SystemConfig &cfg, int count, std::mt19937_64 &rng, bool on_grid = false)
{
    std::uniform_real_distribution<double> angle(-1.2, 1.2);
    std::uniform_real_distribution<double> delay(0.0, 0.5 / cfg.subcarrier_spacing);
    std::normal_distribution<double> normal;
    MultipathSet set;
    for (int l = 0; l < count; ++l)
    {
        Path p;
        p.gain = {normal(rng), normal(rng)};
        if (on_grid)
        {
            std::uniform_int_distribution<int> ii(1, cfg.g_theta - 1), gg(1, cfg.g_phi - 1), jj(0, cfg.g_tau / 2);
            p.aoa = std::asin(cfg.aoa_grid_u(ii(rng)));
            p.aod = std::asin(cfg.aod_grid_u(gg(rng)));
            p.delay = cfg.delay_grid(jj(rng));
        }
        else
        {
            p.aoa = angle(rng);
            p.aod = angle(rng);
            p.delay = delay(rng);
        }
        set.paths.push_back(p);
    }
    return set;
}

inline double max_abs_diff(const ChannelTensor &a, const ChannelTensor &b)
{
    double m = 0.0;
    for (std::size_t k = 0; k < a.h.size(); ++k)
        m = std::max(m, (a.h[k] - b.h[k]).cwiseAbs().maxCoeff());
    return m;
}

} // namespace charm::oracle
