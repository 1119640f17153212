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

#include "charm/error.hpp"
#include "charm/sweep.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <set>

using namespace charm;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace
{

ExperimentConfig desk(int locations = 3, int trials = 2)
{
    ExperimentConfig exp;
    exp.system = SystemConfig::with_default_dictionaries(16, 8, 32);
    exp.scenario.n_locations = locations;
    exp.scenario.trials_per_location = trials;
    exp.lmmse.training_set_size = 40;
    return exp;
}

bool same_records(const std::vector<TrialRecord> &a, const std::vector<TrialRecord> &b)
{
    if (a.size() != b.size())
        return false;
    for (std::size_t n = 0; n < a.size(); ++n)
        if (!a[n].same_as(b[n], false))
            return false;
    return true;
}

TrialRecord record(std::string method, int T, double nmse_db, double runtime)
{
    TrialRecord r;
    r.method = std::move(method);
    r.pilot_length = T;
    r.nmse_db = nmse_db;
    r.runtime_ms = runtime;
    r.kappa = std::numeric_limits<double>::quiet_NaN();
    return r;
}

} // namespace

TEST_CASE("method and axis names", "[sweep]")
{
    for (Method m : all_methods())
        CHECK(parse_method(method_name(m)) == m);
    CHECK(all_methods().size() == 6);
    CHECK(parse_methods("charm, omp3d") == std::vector<Method>{Method::charm, Method::omp3d});
    CHECK_THROWS_WITH(parse_method("music"), ContainsSubstring("charm-trust"));
    CHECK_THROWS_AS(parse_methods(""), ConfigError);
    CHECK(parse_methods("charm,,omp3d,").size() == 2);
    CHECK_THROWS_AS(parse_methods(" , "), ConfigError);
    for (SweepAxis a : {SweepAxis::pilot_length, SweepAxis::snr, SweepAxis::bias})
        CHECK(parse_axis(axis_name(a)) == a);
    CHECK_THROWS_AS(parse_axis("frequency"), ConfigError);
}

TEST_CASE("sweep specification", "[sweep]")
{
    SweepSpec spec;
    spec.axis = SweepAxis::snr;
    spec.values = {-5.0, 10.0};
    spec.fixed = {3, 20.0, 0.1};
    CHECK(spec.at(1).snr_db == 10.0);
    CHECK(spec.at(1).pilot_length == 3);
    CHECK(spec.at(0).bias_std == 0.1);
    const SystemConfig cfg;
    CHECK_NOTHROW(spec.validate(cfg));
    spec.values.clear();
    CHECK_THROWS_AS(spec.validate(cfg), ConfigError);
    spec.axis = SweepAxis::pilot_length;
    spec.values = {65};
    CHECK_THROWS_AS(spec.validate(cfg), ConfigError);
    spec.axis = SweepAxis::bias;
    spec.values = {-0.1};
    CHECK_THROWS_AS(spec.validate(cfg), ConfigError);
}

TEST_CASE("full factorial record count and order", "[sweep]")
{
    const auto exp = desk(3, 2);
    SweepSpec spec;
    spec.values = {2, 3, 4};
    const std::vector<Method> methods{Method::charm, Method::omp3d};
    const auto records = run_sweep(exp, spec, methods);
    REQUIRE(records.size() == 2u * 3u * 3u * 2u);
    std::set<std::tuple<std::string, int, int, int>> cells;
    for (std::size_t n = 0; n < records.size(); ++n)
    {
        const auto &r = records[n];
        CHECK(r.method == method_name(methods[n % 2]));
        CHECK_FALSE(r.failed());
        cells.insert({r.method, r.pilot_length, r.location, r.trial});
    }
    CHECK(cells.size() == records.size());
    CHECK(records.front().pilot_length == 2);
    CHECK(records.back().pilot_length == 4);
    CHECK_THROWS_AS(run_sweep(exp, spec, std::vector<Method>{}), ConfigError);
}

TEST_CASE("every method in a trial sees the same observations", "[sweep]")
{
    const auto exp = desk(2, 2);
    const auto locs = generate_locations(exp);
    const Condition cond{4, 10.0, 0.05};
    std::set<std::uint64_t> prints;
    for (const auto &loc : locs)
        for (int t = 0; t < 2; ++t)
        {
            const auto a = make_trial(exp, loc, cond, t);
            const auto b = make_trial(exp, loc, cond, t);
            REQUIRE(fingerprint(a.y) == fingerprint(b.y));
            REQUIRE(a.pilots.x == b.pilots.x);
            prints.insert(fingerprint(a.y));
        }
    CHECK(prints.size() == 4);

    SweepSpec spec;
    spec.values = {4};
    spec.fixed = cond;
    const auto alone = run_sweep(exp, spec, std::vector<Method>{Method::charm}, locs);
    const auto paired = run_sweep(exp, spec, std::vector<Method>{Method::omp3d, Method::charm, Method::kron_omp}, locs);
    REQUIRE(paired.size() == 3 * alone.size());
    for (std::size_t n = 0; n < alone.size(); ++n)
        CHECK(alone[n].same_as(paired[3 * n + 1], false));
}

TEST_CASE("determinism and worker invariance", "[sweep]")
{
    auto exp = desk(2, 2);
    SweepSpec spec;
    spec.axis = SweepAxis::bias;
    spec.values = {0.0, 0.1};
    const auto methods = all_methods();
    const auto first = run_sweep(exp, spec, methods);
    const auto second = run_sweep(exp, spec, methods);
    exp.jobs = 3;
    const auto threaded = run_sweep(exp, spec, methods);
    CHECK(same_records(first, second));
    CHECK(same_records(first, threaded));
    exp.scenario.master_seed = 2;
    CHECK_FALSE(same_records(first, run_sweep(exp, spec, methods)));
}

TEST_CASE("zero bias leaves CHARM variants on one support", "[sweep]")
{
    const auto exp = desk(2, 3);
    SweepSpec spec;
    spec.values = {4};
    const auto recs = run_sweep(exp, spec, std::vector<Method>{Method::charm, Method::charm_trust});
    for (std::size_t n = 0; n < recs.size(); n += 2)
        CHECK(recs[n].nmse_db == recs[n + 1].nmse_db);
}

TEST_CASE("failed estimator calls are flagged, not fatal", "[sweep]")
{
    const auto exp = desk(1, 1);
    const auto locs = generate_locations(exp);
    const auto in = make_trial(exp, locs[0], Condition{}, 0);
    ExperimentConfig broken = exp;
    broken.lmmse.training_set_size = 1;
    const auto rec = run_method(broken, Method::lmmse, locs[0], in, nullptr);
    CHECK(rec.failed());
    CHECK(std::isnan(rec.runtime_ms));
    CHECK_FALSE(run_method(desk(1, 1), Method::lmmse, locs[0], in, nullptr).failed());
}

TEST_CASE("aggregation", "[sweep]")
{
    const std::vector<TrialRecord> recs{
        record("a", 2, -10.0, 5.0), record("a", 2, -20.0, 1.0),  record("a", 2, 0.0, 100.0),
        record("b", 2, -3.0, 2.0),  record("a", 4, std::nan(""), std::nan("")), record("a", 4, -30.0, 7.0),
        record("b", 4, -1.0, 3.0),  record("b", 4, -2.0, 4.0),
    };
    CHECK(infer_axis(recs) == SweepAxis::pilot_length);
    const auto s = aggregate(recs, SweepAxis::pilot_length);
    REQUIRE(s.size() == 4);
    CHECK(s[0].method == "a");
    CHECK(s[0].x == 2.0);
    CHECK(s[0].count == 3);
    CHECK_THAT(s[0].nmse_db, WithinAbs(10.0 * std::log10((0.1 + 0.01 + 1.0) / 3.0), 1e-12));
    CHECK_THAT(s[0].mean_of_db, WithinAbs(-10.0, 1e-12));
    CHECK(s[0].median_runtime_ms == 5.0);
    CHECK(s[1].method == "b");
    CHECK(s[2].method == "a");
    CHECK(s[2].count == 1);
    CHECK(s[2].failed == 1);
    CHECK(s[2].nmse_db == -30.0);
    CHECK(s[3].median_runtime_ms == 3.5);

    const std::vector<TrialRecord> dead{record("a", 2, std::nan(""), std::nan(""))};
    const auto d = aggregate(dead, SweepAxis::pilot_length);
    CHECK(d[0].count == 0);
    CHECK(std::isnan(d[0].nmse_db));
    CHECK(std::isnan(d[0].median_runtime_ms));

    std::vector<TrialRecord> snr{recs[0], recs[1]};
    snr[1].snr_db = 5.0;
    CHECK(infer_axis(snr) == SweepAxis::snr);
}

TEST_CASE("results CSV", "[sweep][io]")
{
    SECTION("round trip")
    {
        const auto exp = desk(2, 1);
        SweepSpec spec;
        spec.axis = SweepAxis::snr;
        spec.values = {0.0, std::numeric_limits<double>::infinity()};
        auto recs = run_sweep(exp, spec, all_methods());
        recs.push_back(record("omp3d", 4, std::nan(""), std::nan("")));
        recs.back().seed = std::numeric_limits<std::uint64_t>::max();
        const auto back = results_from_string(results_to_string(recs));
        REQUIRE(back.size() == recs.size());
        for (std::size_t n = 0; n < recs.size(); ++n)
            REQUIRE(back[n].same_as(recs[n], true));
    }
    SECTION("empty list is header only")
    {
        const auto text = results_to_string({});
        CHECK(text == std::string(results_header) + "\n");
        CHECK(results_from_string(text).empty());
    }
    SECTION("corrupted row names its line")
    {
        std::vector<TrialRecord> recs{record("charm", 4, -12.5, 1.0), record("omp3d", 4, -11.0, 30.0)};
        auto text = results_to_string(recs);
        const auto pos = text.find("omp3d,4");
        text.replace(pos, 7, "omp3d,x");
        CHECK_THROWS_WITH(results_from_string(text), ContainsSubstring("line 3"));
        CHECK_THROWS_AS(results_from_string(text), IoError);
        CHECK_THROWS_AS(results_from_string("method\n"), IoError);
        CHECK_THROWS_AS(results_from_string(""), IoError);
        CHECK_THROWS_WITH(results_from_string(std::string(results_header) + "\ncharm,4\n"),
                          ContainsSubstring("line 2"));
    }
}
