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
#include "charm/estimator.hpp"
#include "charm/sweep.hpp"

#include <benchmark/benchmark.h>

#include <map>

using namespace charm;

namespace
{

// One full-size trial at 20 dB, shared by every benchmark with the same pilot length.
struct Fixture
{
    ExperimentConfig exp;
    Location loc;
    TrialInputs in;
    PathSupport support;

    explicit Fixture(int T)
    {
        loc = generate_locations(exp).front();
        in = make_trial(exp, loc, Condition{T, 20.0, 0.0}, 0);
        support = charm_support(exp, Method::charm, loc, in);
    }
};

const Fixture &fixture(int T)
{
    static std::map<int, Fixture> cache;
    auto it = cache.find(T);
    if (it == cache.end())
        it = cache.emplace(T, Fixture(T)).first;
    return it->second;
}

void BM_CharmOnline(benchmark::State &state)
{
    const auto &f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(charm_estimate(f.exp.system, f.exp.estimator, f.support, f.in.y, f.in.pilots));
}
BENCHMARK(BM_CharmOnline)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BuildAdps(benchmark::State &state)
{
    const auto &f = fixture(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(build_adps(f.exp.system, f.loc.radio_map));
}
BENCHMARK(BM_BuildAdps)->Unit(benchmark::kMillisecond);

void BM_ExtractSupport(benchmark::State &state)
{
    const auto &f = fixture(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(extract_support(f.exp.system, f.loc.radio_map));
}
BENCHMARK(BM_ExtractSupport)->Unit(benchmark::kMillisecond);

void BM_JointOmp3d(benchmark::State &state)
{
    const auto &f = fixture(static_cast<int>(state.range(0)));
    for (auto _ : state)
        benchmark::DoNotOptimize(joint_omp_3d(f.exp.system, f.in.y, f.in.pilots, f.exp.omp));
}
BENCHMARK(BM_JointOmp3d)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_KronOmp(benchmark::State &state)
{
    const auto &f = fixture(4);
    for (auto _ : state)
        benchmark::DoNotOptimize(kron_omp(f.exp.system, f.in.y, f.in.pilots, f.exp.omp));
}
BENCHMARK(BM_KronOmp)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_LmmseKron(benchmark::State &state)
{
    const auto &f = fixture(4);
    const auto cov = training_covariance(f.exp);
    for (auto _ : state)
        benchmark::DoNotOptimize(lmmse_kron(f.exp.system, f.in.y, f.in.pilots, cov));
}
BENCHMARK(BM_LmmseKron)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
