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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

namespace charm
{

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Physical array, subcarrier and dictionary dimensions shared by every module.
struct SystemConfig
{
    int n_tx = 64;
    int n_rx = 32;
    int n_subcarriers = 128;
    double subcarrier_spacing = 120e3; // Hz
    double carrier_freq = 2.0e9;       // Hz
    int g_theta = 128;                 // AoA dictionary size, uniform in sin
    int g_phi = 256;                   // AoD dictionary size, uniform in sin
    int g_tau = 128;                   // delay bins of width 1/(K df)
    int max_paths = 64;                // cap on MultipathSet length

    // Dictionary sizes follow the 4x angular oversampling and G_tau = K.
    static SystemConfig with_default_dictionaries(int n_tx, int n_rx, int n_subcarriers);

    // Throws ConfigError when any field violates its range.
    void validate() const;

    double delay_resolution() const { return 1.0 / (n_subcarriers * subcarrier_spacing); }
    double bandwidth() const { return n_subcarriers * subcarrier_spacing; }
    double symbol_period() const { return 1.0 / subcarrier_spacing; }

    double aoa_grid_u(int i) const { return -1.0 + 2.0 * i / g_theta; }
    double aod_grid_u(int g) const { return -1.0 + 2.0 * g / g_phi; }
    double delay_grid(int j) const { return j * delay_resolution(); }
    double aoa_spacing() const { return 2.0 / g_theta; }
    double aod_spacing() const { return 2.0 / g_phi; }
};

struct Path
{
    cdouble gain;
    double aoa = 0.0;   // rad
    double aod = 0.0;   // rad
    double delay = 0.0; // s

    bool operator==(const Path &) const = default;
};

// Multipath parameters; serves as ground truth and as the path-level radio map.
struct MultipathSet
{
    std::vector<Path> paths;

    std::size_t size() const { return paths.size(); }
    bool empty() const { return paths.empty(); }
    void validate(const SystemConfig &cfg) const;

    bool operator==(const MultipathSet &) const = default;
};

struct ChannelTensor
{
    std::vector<CMatrix> h; // one n_rx x n_tx matrix per subcarrier

    int n_subcarriers() const { return static_cast<int>(h.size()); }
    const CMatrix &operator[](std::size_t k) const { return h[k]; }
    CMatrix &operator[](std::size_t k) { return h[k]; }

    static ChannelTensor zeros(const SystemConfig &cfg);
};

// Unit-norm pilot beams stored as columns (n_tx x T).
struct PilotMatrix
{
    CMatrix x;
    std::vector<int> dft_columns; // source DFT column of each pilot, when known

    int length() const { return static_cast<int>(x.cols()); }
};

struct RxObservations
{
    std::vector<CMatrix> y;      // one n_rx x T matrix per subcarrier, column t = y[t,k]
    double noise_variance = 0.0; // per complex element

    int n_subcarriers() const { return static_cast<int>(y.size()); }
    int pilot_length() const { return y.empty() ? 0 : static_cast<int>(y.front().cols()); }
};

enum class PilotMode
{
    evenly_spaced,
    seeded_random,
};

inline constexpr double noiseless = std::numeric_limits<double>::infinity();

// ULA response with half-wavelength spacing in the sin domain, 1/sqrt(n) normalized.
CVector steering_vector_sin(int n, double u);

// Same response parameterized by the physical angle in radians.
CVector steering_vector(int n, double angle);

ChannelTensor synthesize_channel(const SystemConfig &cfg, const MultipathSet &paths);

// y[t,k] = H[k] x_t + n[t,k]. The noise variance is calibrated to the empirical mean
// per-element signal power of (H, X). snr_db = +inf produces noiseless observations.
RxObservations simulate_rx(const SystemConfig &cfg, const ChannelTensor &h, const PilotMatrix &x,
                           double snr_db, std::uint64_t rng_seed);

struct Nmse
{
    double linear = 0.0;
    double db = 0.0;
};

inline constexpr double nmse_floor = 1e-15;

double to_db(double linear);

Nmse nmse(const ChannelTensor &estimate, const ChannelTensor &reference);

PilotMatrix dft_pilots(const SystemConfig &cfg, int pilot_length, PilotMode mode = PilotMode::evenly_spaced,
                       std::uint64_t seed = 0);

// FNV-1a over the raw observation bytes; used to verify paired trials.
std::uint64_t fingerprint(const RxObservations &obs);

} // namespace charm
