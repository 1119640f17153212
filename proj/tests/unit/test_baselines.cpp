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
#include "charm/baselines.hpp"
#include "charm/error.hpp"
#include "charm/scenario.hpp"
#include "charm/sweep.hpp"
#include "oracles.hpp"

#include <catch_amalgamated.hpp>
#include <unsupported/Eigen/KroneckerProduct>

#include <numeric>
#include <random>

using namespace charm;
using Catch::Matchers::WithinAbs;

namespace
{

SystemConfig cube16()
{
    return SystemConfig::with_default_dictionaries(4, 4, 16); // 16 x 16 x 16 atoms
}

std::vector<CMatrix> random_residual(const SystemConfig &cfg, int T, std::mt19937_64 &rng)
{
    std::normal_distribution<double> n01;
    std::vector<CMatrix> r(cfg.n_subcarriers, CMatrix(cfg.n_rx, T));
    for (auto &m : r)
        for (Eigen::Index e = 0; e < m.size(); ++e)
            m.data()[e] = {n01(rng), n01(rng)};
    return r;
}

MultipathSet on_grid_path(const SystemConfig &cfg, int i, int g, int j, cdouble gain)
{
    return snap_to_grid(cfg, MultipathSet{{Path{gain, std::asin(cfg.aoa_grid_u(i)), std::asin(cfg.aod_grid_u(g)),
                                                 cfg.delay_grid(j)}}});
}

} // namespace

TEST_CASE("separable OMP scoring equals the naive atom loop", "[baselines][oracle]")
{
    const auto cfg = cube16();
    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 4; ++trial)
    {
        const int T = 1 + trial;
        const auto x = dft_pilots(cfg, T, PilotMode::seeded_random, trial);
        const Omp3dScorer scorer(cfg, x);
        auto residual = random_residual(cfg, T, rng);
        if (trial == 3)
        {
            // Plant a strong atom so the argmax is decisive.
            const CVector resp = scorer.response(5, 9, 3);
            const Eigen::Index block = static_cast<Eigen::Index>(T) * cfg.n_rx;
            for (int k = 0; k < cfg.n_subcarriers; ++k)
                residual[k] += 10.0 * Eigen::Map<const CMatrix>(resp.data() + k * block, cfg.n_rx, T);
        }

        const auto fast = scorer.scores(residual);
        std::vector<double> naive(fast.size());
        for (int j = 0; j < cfg.g_tau; ++j)
            for (int g = 0; g < cfg.g_phi; ++g)
                for (int i = 0; i < cfg.g_theta; ++i)
                    naive[i + cfg.g_theta * (g + cfg.g_phi * j)] = oracle::omp_score(cfg, x.x, residual, i, g, j);

        const double scale = *std::max_element(naive.begin(), naive.end());
        for (std::size_t a = 0; a < fast.size(); ++a)
            REQUIRE(std::abs(fast[a] - naive[a]) <= 1e-9 * scale);

        std::vector<std::size_t> order_fast(fast.size()), order_naive(fast.size());
        std::iota(order_fast.begin(), order_fast.end(), 0);
        std::iota(order_naive.begin(), order_naive.end(), 0);
        std::stable_sort(order_fast.begin(), order_fast.end(), [&](auto a, auto b) { return fast[a] > fast[b]; });
        std::stable_sort(order_naive.begin(), order_naive.end(), [&](auto a, auto b) { return naive[a] > naive[b]; });
        for (int n = 0; n < 10; ++n)
            REQUIRE(std::abs(naive[order_fast[n]] - naive[order_naive[n]]) <= 1e-9 * scale);

        const auto best = scorer.best(residual);
        const std::size_t flat = best.i + cfg.g_theta * (best.g + cfg.g_phi * best.j);
        REQUIRE(std::abs(naive[flat] - scale) <= 1e-9 * scale);
        REQUIRE_THAT(best.score, WithinAbs(scale, 1e-9 * scale));
        if (trial == 3)
        {
            CHECK(best.i == 5);
            CHECK(best.g == 9);
            CHECK(best.j == 3);
        }
    }
}

TEST_CASE("atom responses match the explicit construction", "[baselines][oracle]")
{
    const auto cfg = cube16();
    const auto x = dft_pilots(cfg, 3);
    const Omp3dScorer scorer(cfg, x);
    const CVector resp = scorer.response(7, 2, 5);
    REQUIRE(resp.size() == cfg.n_subcarriers * 3 * cfg.n_rx);
    for (int k = 0; k < cfg.n_subcarriers; ++k)
        for (int t = 0; t < 3; ++t)
            for (int r = 0; r < cfg.n_rx; ++r)
            {
                const cdouble ref = oracle::aod_atom(cfg, x.x, 2, t) *
                                    std::polar(1.0, -2.0 * pi * k * cfg.subcarrier_spacing * cfg.delay_grid(5)) *
                                    oracle::steer(cfg.n_rx, cfg.aoa_grid_u(7), r);
                REQUIRE(std::abs(resp[(k * 3 + t) * cfg.n_rx + r] - ref) < 1e-13);
            }
}

TEST_CASE("joint OMP-3D", "[baselines]")
{
    const auto cfg = cube16();

    SECTION("single on-grid path without noise")
    {
        const auto set = on_grid_path(cfg, 11, 6, 4, {0.5, -0.5});
        const auto x = dft_pilots(cfg, 4);
        const auto h = synthesize_channel(cfg, set);
        const auto y = simulate_rx(cfg, h, x, noiseless, 0);
        OmpTrace trace;
        const auto est = joint_omp_3d(cfg, y, x, {}, &trace);
        REQUIRE(!trace.atoms.empty());
        CHECK(trace.atoms[0].i == 11);
        CHECK(trace.atoms[0].g == 6);
        CHECK(trace.atoms[0].j == 4);
        CHECK(nmse(est.h_hat, h).db < -100.0);
        CHECK(std::isnan(est.condition_number));
    }
    SECTION("zero observations select nothing")
    {
        const auto x = dft_pilots(cfg, 2);
        RxObservations y;
        y.y.assign(cfg.n_subcarriers, CMatrix::Zero(cfg.n_rx, 2));
        OmpTrace trace;
        const auto est = joint_omp_3d(cfg, y, x, {}, &trace);
        CHECK(trace.atoms.empty());
        CHECK(est.support_size == 0);
        for (const auto &m : est.h_hat.h)
            REQUIRE(m.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("residual energy never grows and the residual is orthogonal to the selection")
    {
        const auto big = SystemConfig::with_default_dictionaries(8, 8, 32);
        std::mt19937_64 rng(55);
        for (int trial = 0; trial < 5; ++trial)
        {
            const auto set = oracle::random_paths(big, 5, rng);
            const auto x = dft_pilots(big, 3);
            const auto y = simulate_rx(big, synthesize_channel(big, set), x, 15.0, trial);
            Omp3dConfig ocfg;
            ocfg.floor_scale = 0.0;
            OmpTrace trace;
            joint_omp_3d(big, y, x, ocfg, &trace);
            REQUIRE(trace.residual_energy.size() == trace.atoms.size() + 1);
            for (std::size_t n = 1; n < trace.residual_energy.size(); ++n)
                REQUIRE(trace.residual_energy[n] <= trace.residual_energy[n - 1] * (1.0 + 1e-12));
            const CVector inner = trace.responses.adjoint() * trace.residual;
            const double ref = trace.responses.colwise().norm().maxCoeff() * trace.residual.norm();
            REQUIRE(inner.cwiseAbs().maxCoeff() < 1e-8 * ref);
            REQUIRE(static_cast<int>(trace.atoms.size()) <= default_max_paths(big));
        }
    }
    SECTION("iteration cap and dimension errors")
    {
        Omp3dConfig ocfg;
        ocfg.max_iterations = -1;
        CHECK_THROWS_AS(ocfg.resolved_iterations(cfg), ConfigError);
        ocfg.max_iterations = 2;
        CHECK(ocfg.resolved_iterations(cfg) == 2);
        CHECK(Omp3dConfig{}.resolved_iterations(SystemConfig{}) == 16);
        const auto x = dft_pilots(cfg, 2);
        RxObservations y;
        y.y.assign(cfg.n_subcarriers, CMatrix::Zero(cfg.n_rx, 3));
        CHECK_THROWS_AS(joint_omp_3d(cfg, y, x), ConfigError);
        CHECK_THROWS_AS(kron_omp(cfg, y, x), ConfigError);
    }
}

TEST_CASE("Kron-OMP", "[baselines]")
{
    SECTION("single on-grid path without noise")
    {
        const auto cfg = SystemConfig::with_default_dictionaries(16, 8, 16);
        const auto set = on_grid_path(cfg, 20, 13, 3, {0.1, 0.9});
        const auto x = dft_pilots(cfg, 4);
        const auto h = synthesize_channel(cfg, set);
        const auto y = simulate_rx(cfg, h, x, noiseless, 0);
        const auto est = kron_omp(cfg, y, x);
        CHECK(nmse(est.h_hat, h).db < -100.0);
        CHECK(est.support_size >= cfg.n_subcarriers);
    }
    SECTION("no coherent averaging: far worse than OMP-3D at -15 dB")
    {
        const SystemConfig cfg;
        ScenarioConfig sc;
        double omp = 0.0, kron = 0.0;
        for (int loc = 0; loc < 6; ++loc)
        {
            const auto l = generate_location(cfg, sc, 1000 + loc, loc);
            const auto x = dft_pilots(cfg, 4);
            const auto h = synthesize_channel(cfg, l.truth);
            const auto y = simulate_rx(cfg, h, x, -15.0, loc);
            omp += nmse(joint_omp_3d(cfg, y, x).h_hat, h).linear;
            kron += nmse(kron_omp(cfg, y, x).h_hat, h).linear;
        }
        CHECK(to_db(kron / 6) - to_db(omp / 6) > 5.0);
    }
}

TEST_CASE("LMMSE with Kronecker covariance", "[baselines][oracle]")
{
    SECTION("scalar closed form")
    {
        SystemConfig cfg;
        cfg.n_tx = cfg.n_rx = cfg.n_subcarriers = 1;
        const double r_t = 1.0, r_r = 0.7, sigma2 = 0.3;
        const cdouble xv{0.6, 0.8}, yv{0.2, -1.1};
        PilotMatrix x;
        x.x = CMatrix::Constant(1, 1, xv);
        RxObservations y;
        y.y = {CMatrix::Constant(1, 1, yv)};
        y.noise_variance = sigma2;
        const KronCovariance cov{CMatrix::Constant(1, 1, r_t), CMatrix::Constant(1, 1, r_r)};
        const auto est = lmmse_kron(cfg, y, x, cov);
        const double r = r_t * r_r;
        const cdouble ref = r * std::conj(xv) * yv / (std::norm(xv) * r + sigma2);
        CHECK(std::abs(est.h_hat[0](0, 0) - ref) < 1e-14);
    }
    SECTION("dense formula on a small case")
    {
        const auto cfg = SystemConfig::with_default_dictionaries(3, 2, 2);
        std::mt19937_64 rng(6);
        const CMatrix gt = CMatrix::Random(3, 3), gr = CMatrix::Random(2, 2);
        KronCovariance cov{gt * gt.adjoint(), gr * gr.adjoint()};
        cov.r_tx /= cov.r_tx.trace().real();
        const auto x = dft_pilots(cfg, 2);
        const auto h = synthesize_channel(cfg, oracle::random_paths(cfg, 2, rng));
        const auto y = simulate_rx(cfg, h, x, 5.0, 3);
        const auto est = lmmse_kron(cfg, y, x, cov);

        // A vec(H) = vec(H X) with A = X^T (x) I.
        const CMatrix c_h = Eigen::kroneckerProduct(cov.r_tx.transpose(), cov.r_rx);
        const CMatrix a = Eigen::kroneckerProduct(CMatrix(x.x.transpose()), CMatrix::Identity(2, 2));
        const CMatrix s = a * c_h * a.adjoint() + y.noise_variance * CMatrix::Identity(a.rows(), a.rows());
        const CMatrix gain = c_h * a.adjoint() * s.inverse();
        for (int k = 0; k < cfg.n_subcarriers; ++k)
        {
            const CVector yk = Eigen::Map<const CVector>(y.y[k].data(), y.y[k].size());
            const CVector ref = gain * yk;
            const CMatrix ref_h = Eigen::Map<const CMatrix>(ref.data(), 2, 3);
            REQUIRE((est.h_hat[k] - ref_h).cwiseAbs().maxCoeff() < 1e-10);
        }
    }
    SECTION("noiseless full-rank pilots reduce to least squares")
    {
        const auto cfg = SystemConfig::with_default_dictionaries(4, 4, 8);
        std::mt19937_64 rng(8);
        const auto h = synthesize_channel(cfg, oracle::random_paths(cfg, 3, rng));
        const auto x = dft_pilots(cfg, 4);
        const auto y = simulate_rx(cfg, h, x, noiseless, 0);
        const KronCovariance cov{CMatrix::Identity(4, 4) / 4.0, CMatrix::Identity(4, 4)};
        CHECK(nmse(lmmse_kron(cfg, y, x, cov).h_hat, h).db < -100.0);
    }
    SECTION("pilot starved at full scale")
    {
        const ExperimentConfig exp;
        const auto cov = training_covariance(exp);
        double acc = 0.0;
        for (int loc = 0; loc < 3; ++loc)
        {
            const auto l = generate_location(exp.system, exp.scenario, 77 + loc, loc);
            const auto x = dft_pilots(exp.system, 4);
            const auto h = synthesize_channel(exp.system, l.truth);
            const auto y = simulate_rx(exp.system, h, x, 20.0, loc);
            acc += nmse(lmmse_kron(exp.system, y, x, cov).h_hat, h).linear;
        }
        CHECK(to_db(acc / 3) > -3.0);
    }
    SECTION("input validation")
    {
        const auto cfg = SystemConfig::with_default_dictionaries(4, 4, 8);
        const auto x = dft_pilots(cfg, 2);
        RxObservations y;
        y.y.assign(cfg.n_subcarriers, CMatrix::Zero(4, 2));
        KronCovariance bad{CMatrix::Identity(4, 4), -CMatrix::Identity(4, 4)};
        CHECK_THROWS_AS(lmmse_kron(cfg, y, x, bad), ConfigError);
        KronCovariance wrong{CMatrix::Identity(3, 3), CMatrix::Identity(4, 4)};
        CHECK_THROWS_AS(lmmse_kron(cfg, y, x, wrong), ConfigError);
        LmmseConfig lc;
        lc.training_set_size = 7;
        CHECK_THROWS_AS(lc.validate(cfg), ConfigError);
        lc.source = CovarianceSource::oracle;
        CHECK_NOTHROW(lc.validate(cfg));
        CHECK_THROWS_AS(sample_kron_covariance(cfg, {}), ConfigError);
    }
}

TEST_CASE("sample covariance equals brute-force channel averages", "[baselines][oracle]")
{
    const auto cfg = SystemConfig::with_default_dictionaries(6, 4, 16);
    std::mt19937_64 rng(13);
    std::vector<MultipathSet> draws;
    for (int n = 0; n < 5; ++n)
        draws.push_back(oracle::random_paths(cfg, 1 + n, rng));
    const auto cov = sample_kron_covariance(cfg, draws);

    CMatrix rr = CMatrix::Zero(4, 4), rt = CMatrix::Zero(6, 6);
    for (const auto &d : draws)
    {
        const auto h = oracle::channel(cfg, d);
        for (const auto &m : h.h)
        {
            rr += m * m.adjoint();
            rt += m.adjoint() * m;
        }
    }
    rr /= static_cast<double>(draws.size() * cfg.n_subcarriers);
    rt /= static_cast<double>(draws.size() * cfg.n_subcarriers);
    rt /= rr.trace().real();
    CHECK((cov.r_rx - rr).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((cov.r_tx - rt).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THAT(cov.r_tx.trace().real(), WithinAbs(1.0, 1e-12));
}
