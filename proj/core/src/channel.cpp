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

#include "charm/channel.hpp"
#include "charm/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <string>

namespace charm
{

SystemConfig SystemConfig::with_default_dictionaries(int n_tx, int n_rx, int n_subcarriers)
{
    SystemConfig cfg;
    cfg.n_tx = n_tx;
    cfg.n_rx = n_rx;
    cfg.n_subcarriers = n_subcarriers;
    cfg.g_theta = 4 * n_rx;
    cfg.g_phi = 4 * n_tx;
    cfg.g_tau = n_subcarriers;
    return cfg;
}

void SystemConfig::validate() const
{
    if (n_tx < 1 || n_rx < 1 || n_subcarriers < 1)
        throw ConfigError("SystemConfig: antenna and subcarrier counts must be >= 1");
    if (g_theta < 2 || g_phi < 2 || g_tau < 2)
        throw ConfigError("SystemConfig: dictionary sizes must be >= 2");
    if (!(subcarrier_spacing > 0.0) || !std::isfinite(subcarrier_spacing))
        throw ConfigError("SystemConfig: subcarrier_spacing must be positive");
    if (!(carrier_freq > 0.0) || !std::isfinite(carrier_freq))
        throw ConfigError("SystemConfig: carrier_freq must be positive");
    if (max_paths < 1)
        throw ConfigError("SystemConfig: max_paths must be >= 1");
}

void MultipathSet::validate(const SystemConfig &cfg) const
{
    if (paths.empty())
        throw ConfigError("MultipathSet: at least one path is required");
    if (static_cast<int>(paths.size()) > cfg.max_paths)
        throw ConfigError("MultipathSet: " + std::to_string(paths.size()) + " paths exceed the cap of " +
                          std::to_string(cfg.max_paths));
    for (const auto &p : paths)
    {
        if (!std::isfinite(p.gain.real()) || !std::isfinite(p.gain.imag()))
            throw ConfigError("MultipathSet: non-finite path gain");
        if (!(std::abs(p.aoa) <= pi / 2) || !(std::abs(p.aod) <= pi / 2))
            throw ConfigError("MultipathSet: path angle outside [-pi/2, pi/2]");
        if (!(p.delay >= 0.0) || !(p.delay < cfg.symbol_period()))
            throw ConfigError("MultipathSet: path delay outside [0, 1/df)");
    }
}

ChannelTensor ChannelTensor::zeros(const SystemConfig &cfg)
{
    ChannelTensor t;
    t.h.assign(cfg.n_subcarriers, CMatrix::Zero(cfg.n_rx, cfg.n_tx));
    return t;
}

CVector steering_vector_sin(int n, double u)
{
    if (n < 1)
        throw ConfigError("steering_vector: antenna count must be >= 1");
    if (!std::isfinite(u))
        throw ConfigError("steering_vector: non-finite direction");
    CVector a(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m)
        a[m] = std::polar(scale, pi * m * u);
    return a;
}

CVector steering_vector(int n, double angle)
{
    if (!std::isfinite(angle))
        throw ConfigError("steering_vector: non-finite angle");
    return steering_vector_sin(n, std::sin(angle));
}

ChannelTensor synthesize_channel(const SystemConfig &cfg, const MultipathSet &paths)
{
    cfg.validate();
    paths.validate(cfg);

    const auto n_paths = static_cast<Eigen::Index>(paths.size());
    CMatrix a_rx(cfg.n_rx, n_paths);
    CMatrix a_tx(cfg.n_tx, n_paths);
    for (Eigen::Index l = 0; l < n_paths; ++l)
    {
        a_rx.col(l) = steering_vector(cfg.n_rx, paths.paths[l].aoa);
        a_tx.col(l) = steering_vector(cfg.n_tx, paths.paths[l].aod);
    }

    ChannelTensor out;
    out.h.resize(cfg.n_subcarriers);
    CMatrix weighted(cfg.n_rx, n_paths);
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        for (Eigen::Index l = 0; l < n_paths; ++l)
        {
            const auto &p = paths.paths[l];
            const cdouble phase = std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * p.delay);
            weighted.col(l) = a_rx.col(l) * (p.gain * phase);
        }
        out.h[k].noalias() = weighted * a_tx.adjoint();
    }
    return out;
}

RxObservations simulate_rx(const SystemConfig &cfg, const ChannelTensor &h, const PilotMatrix &x, double snr_db,
                           std::uint64_t rng_seed)
{
    const int n_pilots = x.length();
    if (n_pilots < 1)
        throw ConfigError("simulate_rx: pilot length must be >= 1");
    if (h.n_subcarriers() != cfg.n_subcarriers || x.x.rows() != cfg.n_tx)
        throw ConfigError("simulate_rx: dimension mismatch with SystemConfig");

    RxObservations obs;
    obs.y.resize(cfg.n_subcarriers);
    double signal_power = 0.0;
    for (int k = 0; k < cfg.n_subcarriers; ++k)
    {
        if (h[k].rows() != cfg.n_rx || h[k].cols() != cfg.n_tx)
            throw ConfigError("simulate_rx: channel dimension mismatch");
        obs.y[k].noalias() = h[k] * x.x;
        signal_power += obs.y[k].squaredNorm();
    }
    signal_power /= static_cast<double>(cfg.n_subcarriers) * n_pilots * cfg.n_rx;

    if (std::isinf(snr_db) && snr_db > 0)
    {
        obs.noise_variance = 0.0;
        return obs;
    }
    if (!std::isfinite(snr_db))
        throw ConfigError("simulate_rx: SNR must be finite or +inf");
    if (!(signal_power > 0.0))
        throw NumericError("simulate_rx: all-zero channel has undefined noise variance at finite SNR");

    obs.noise_variance = signal_power / std::pow(10.0, snr_db / 10.0);
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(obs.noise_variance / 2.0));
    for (auto &yk : obs.y)
        for (Eigen::Index t = 0; t < yk.cols(); ++t)
            for (Eigen::Index r = 0; r < yk.rows(); ++r)
            {
                const double re = gauss(rng);
                const double im = gauss(rng);
                yk(r, t) += cdouble(re, im);
            }
    return obs;
}

double to_db(double linear)
{
    return 10.0 * std::log10(std::max(linear, nmse_floor));
}

Nmse nmse(const ChannelTensor &estimate, const ChannelTensor &reference)
{
    if (estimate.n_subcarriers() != reference.n_subcarriers())
        throw ConfigError("nmse: subcarrier count mismatch");
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t k = 0; k < reference.h.size(); ++k)
    {
        if (estimate[k].rows() != reference[k].rows() || estimate[k].cols() != reference[k].cols())
            throw ConfigError("nmse: matrix dimension mismatch");
        err += (estimate[k] - reference[k]).squaredNorm();
        ref += reference[k].squaredNorm();
    }
    if (!(ref > 0.0))
        throw NumericError("nmse: reference channel has zero energy");
    const double lin = err / ref;
    return {lin, to_db(lin)};
}

PilotMatrix dft_pilots(const SystemConfig &cfg, int pilot_length, PilotMode mode, std::uint64_t seed)
{
    const int n = cfg.n_tx;
    if (pilot_length < 1 || pilot_length > n)
        throw ConfigError("dft_pilots: pilot length must lie in [1, n_tx]");

    std::vector<int> columns(pilot_length);
    if (mode == PilotMode::evenly_spaced)
    {
        for (int i = 0; i < pilot_length; ++i)
            columns[i] = static_cast<int>((static_cast<long long>(i) * n) / pilot_length);
    }
    else
    {
        // Partial Fisher-Yates over the column indices.
        std::vector<int> pool(n);
        std::iota(pool.begin(), pool.end(), 0);
        std::mt19937_64 rng(seed);
        for (int i = 0; i < pilot_length; ++i)
        {
            std::uniform_int_distribution<int> pick(i, n - 1);
            std::swap(pool[i], pool[pick(rng)]);
            columns[i] = pool[i];
        }
    }

    PilotMatrix out;
    out.x.resize(n, pilot_length);
    out.dft_columns = columns;
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int t = 0; t < pilot_length; ++t)
        for (int m = 0; m < n; ++m)
        {
            // Reduce the phase index modulo n to keep the argument small.
            const long long idx = (static_cast<long long>(columns[t]) * m) % n;
            out.x(m, t) = std::polar(scale, 2.0 * pi * static_cast<double>(idx) / n);
        }
    return out;
}

std::uint64_t fingerprint(const RxObservations &obs)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const void *data, std::size_t bytes) {
        const auto *p = static_cast<const unsigned char *>(data);
        for (std::size_t i = 0; i < bytes; ++i)
        {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    };
    feed(&obs.noise_variance, sizeof(double));
    for (const auto &yk : obs.y)
        feed(yk.data(), static_cast<std::size_t>(yk.size()) * sizeof(cdouble));
    return h;
}

} // namespace charm
