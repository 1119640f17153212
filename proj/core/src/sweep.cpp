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

#include "charm/sweep.hpp"
#include "charm/error.hpp"
#include "charm/io.hpp"
#include "charm/seed.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace charm
{

namespace
{

constexpr std::array<std::pair<Method, std::string_view>, 6> method_names{{
    {Method::charm, "charm"},
    {Method::charm_trust, "charm-trust"},
    {Method::charm_norefine, "charm-norefine"},
    {Method::omp3d, "omp3d"},
    {Method::lmmse, "lmmse"},
    {Method::kron_omp, "kron-omp"},
}};

std::string valid_method_list()
{
    std::string out;
    for (const auto &[m, name] : method_names)
    {
        if (!out.empty())
            out += ", ";
        out += name;
    }
    return out;
}

bool same_double(double a, double b)
{
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

double nan()
{
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

std::string_view method_name(Method m)
{
    for (const auto &[method, name] : method_names)
        if (method == m)
            return name;
    return "unknown";
}

Method parse_method(std::string_view name)
{
    for (const auto &[method, n] : method_names)
        if (n == name)
            return method;
    throw ConfigError("unknown method '" + std::string(name) + "'; valid methods: " + valid_method_list());
}

std::vector<Method> parse_methods(std::string_view list)
{
    std::vector<Method> out;
    std::size_t start = 0;
    while (start <= list.size())
    {
        const auto end = std::min(list.find(',', start), list.size());
        auto token = list.substr(start, end - start);
        while (!token.empty() && token.front() == ' ')
            token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ')
            token.remove_suffix(1);
        if (!token.empty())
            out.push_back(parse_method(token));
        start = end + 1;
    }
    if (out.empty())
        throw ConfigError("method list is empty; valid methods: " + valid_method_list());
    return out;
}

const std::vector<Method> &all_methods()
{
    static const std::vector<Method> methods{Method::charm,  Method::charm_trust, Method::charm_norefine,
                                             Method::omp3d,  Method::lmmse,       Method::kron_omp};
    return methods;
}

std::string_view axis_name(SweepAxis a)
{
    switch (a)
    {
    case SweepAxis::pilot_length:
        return "T";
    case SweepAxis::snr:
        return "snr";
    case SweepAxis::bias:
        return "bias";
    }
    return "T";
}

SweepAxis parse_axis(std::string_view name)
{
    if (name == "T" || name == "pilot_length")
        return SweepAxis::pilot_length;
    if (name == "snr" || name == "snr_db")
        return SweepAxis::snr;
    if (name == "bias" || name == "bias_std")
        return SweepAxis::bias;
    throw ConfigError("unknown sweep axis '" + std::string(name) + "'; valid axes: T, snr, bias");
}

Condition SweepSpec::at(std::size_t index) const
{
    Condition c = fixed;
    const double v = values.at(index);
    switch (axis)
    {
    case SweepAxis::pilot_length:
        c.pilot_length = static_cast<int>(std::lround(v));
        break;
    case SweepAxis::snr:
        c.snr_db = v;
        break;
    case SweepAxis::bias:
        c.bias_std = v;
        break;
    }
    return c;
}

void SweepSpec::validate(const SystemConfig &cfg) const
{
    if (values.empty())
        throw ConfigError("sweep needs at least one value");
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        const Condition c = at(i);
        if (c.pilot_length < 1 || c.pilot_length > cfg.n_tx)
            throw ConfigError("sweep: pilot length must lie in [1, n_tx]");
        if (std::isnan(c.snr_db) || c.snr_db == -std::numeric_limits<double>::infinity())
            throw ConfigError("sweep: SNR must be finite or +inf");
        MismatchConfig{c.bias_std}.validate();
    }
}

void ExperimentConfig::validate() const
{
    system.validate();
    scenario.validate(system);
    estimator.validate();
    omp.resolved_iterations(system);
    if (jobs < 1)
        throw ConfigError("jobs must be >= 1");
}

TrialInputs make_trial(const ExperimentConfig &exp, const Location &loc, const Condition &cond, int trial)
{
    TrialInputs in;
    in.condition = cond;
    in.location = loc.id;
    in.trial = trial;
    in.seed = derive_seed({exp.scenario.master_seed, loc.seed, static_cast<std::uint64_t>(trial)});
    in.biased_map = inject_bias(loc.radio_map, MismatchConfig{cond.bias_std}, derive_seed({in.seed, 3}));
    in.pilots = dft_pilots(exp.system, cond.pilot_length, exp.pilot_mode, derive_seed({in.seed, 2}));
    in.h = synthesize_channel(exp.system, loc.truth);
    in.y = simulate_rx(exp.system, in.h, in.pilots, cond.snr_db, derive_seed({in.seed, 1}));
    return in;
}

PathSupport charm_support(const ExperimentConfig &exp, Method m, const Location &loc, const TrialInputs &trial)
{
    SupportOptions opts;
    opts.threshold_db = exp.threshold_db;
    opts.refine = m != Method::charm_norefine;
    opts.trust = m == Method::charm_trust;
    return extract_support(exp.system, loc.radio_map, trial.biased_map, opts);
}

bool TrialRecord::failed() const
{
    return !std::isfinite(nmse_db);
}

bool TrialRecord::same_as(const TrialRecord &o, bool compare_runtime) const
{
    return method == o.method && pilot_length == o.pilot_length && same_double(snr_db, o.snr_db) &&
           same_double(bias_std, o.bias_std) && location == o.location && trial == o.trial && seed == o.seed &&
           same_double(nmse_db, o.nmse_db) && (!compare_runtime || same_double(runtime_ms, o.runtime_ms)) &&
           same_double(kappa, o.kappa) && regularized == o.regularized && support_size == o.support_size;
}

KronCovariance training_covariance(const ExperimentConfig &exp)
{
    exp.lmmse.validate(exp.system);
    std::vector<MultipathSet> draws;
    draws.reserve(exp.lmmse.training_set_size);
    for (int n = 0; n < exp.lmmse.training_set_size; ++n)
    {
        const auto seed = derive_seed({exp.scenario.master_seed, 0x747261696eULL, static_cast<std::uint64_t>(n)});
        draws.push_back(generate_location(exp.system, exp.scenario, seed, n).truth);
    }
    return sample_kron_covariance(exp.system, draws);
}

TrialRecord run_method(const ExperimentConfig &exp, Method m, const Location &loc, const TrialInputs &trial,
                       const KronCovariance *shared_covariance)
{
    TrialRecord rec;
    rec.method = std::string(method_name(m));
    rec.pilot_length = trial.condition.pilot_length;
    rec.snr_db = trial.condition.snr_db;
    rec.bias_std = trial.condition.bias_std;
    rec.location = trial.location;
    rec.trial = trial.trial;
    rec.seed = trial.seed;
    rec.kappa = nan();

    try
    {
        EstimateResult est;
        switch (m)
        {
        case Method::charm:
        case Method::charm_trust:
        case Method::charm_norefine: {
            const PathSupport support = charm_support(exp, m, loc, trial);
            est = charm_estimate(exp.system, exp.estimator, support, trial.y, trial.pilots);
            rec.kappa = est.condition_number;
            break;
        }
        case Method::omp3d:
            est = joint_omp_3d(exp.system, trial.y, trial.pilots, exp.omp);
            break;
        case Method::kron_omp:
            est = kron_omp(exp.system, trial.y, trial.pilots, exp.omp);
            break;
        case Method::lmmse: {
            KronCovariance cov;
            if (exp.lmmse.source == CovarianceSource::oracle)
                cov = sample_kron_covariance(exp.system, std::span<const MultipathSet>(&loc.truth, 1));
            else if (shared_covariance)
                cov = *shared_covariance;
            else
                cov = training_covariance(exp);
            est = lmmse_kron(exp.system, trial.y, trial.pilots, cov);
            break;
        }
        }
        rec.nmse_db = nmse(est.h_hat, trial.h).db;
        rec.runtime_ms = est.online_ms;
        rec.regularized = est.regularized;
        rec.support_size = est.support_size;
    }
    catch (const std::exception &)
    {
        rec.nmse_db = nan();
        rec.runtime_ms = nan();
    }
    return rec;
}

std::vector<Location> generate_locations(const ExperimentConfig &exp)
{
    std::vector<Location> out;
    out.reserve(exp.scenario.n_locations);
    for (int l = 0; l < exp.scenario.n_locations; ++l)
        out.push_back(generate_location(exp.system, exp.scenario, location_seed(exp.scenario, l), l));
    return out;
}

std::vector<TrialRecord> run_sweep(const ExperimentConfig &exp, const SweepSpec &spec, std::span<const Method> methods,
                                   std::span<const Location> locations)
{
    exp.validate();
    spec.validate(exp.system);
    if (methods.empty())
        throw ConfigError("run_sweep: at least one method is required");

    std::vector<Location> generated;
    if (locations.empty())
    {
        generated = generate_locations(exp);
        locations = generated;
    }
    for (const auto &loc : locations)
        loc.truth.validate(exp.system);

    std::optional<KronCovariance> covariance;
    if (exp.lmmse.source == CovarianceSource::sample &&
        std::find(methods.begin(), methods.end(), Method::lmmse) != methods.end())
        covariance = training_covariance(exp);

    const std::size_t n_cond = spec.values.size();
    const std::size_t n_loc = locations.size();
    const std::size_t n_trial = static_cast<std::size_t>(exp.scenario.trials_per_location);
    const std::size_t n_units = n_cond * n_loc * n_trial;
    std::vector<std::vector<TrialRecord>> results(n_units);

    auto run_unit = [&](std::size_t unit) {
        const std::size_t c = unit / (n_loc * n_trial);
        const std::size_t l = (unit / n_trial) % n_loc;
        const int t = static_cast<int>(unit % n_trial);
        const Condition cond = spec.at(c);
        const Location &loc = locations[l];
        auto &out = results[unit];
        try
        {
            const TrialInputs in = make_trial(exp, loc, cond, t);
            for (Method m : methods)
                out.push_back(run_method(exp, m, loc, in, covariance ? &*covariance : nullptr));
        }
        catch (const std::exception &)
        {
            // The trial itself could not be synthesized; flag every method.
            for (Method m : methods)
            {
                TrialRecord rec;
                rec.method = std::string(method_name(m));
                rec.pilot_length = cond.pilot_length;
                rec.snr_db = cond.snr_db;
                rec.bias_std = cond.bias_std;
                rec.location = loc.id;
                rec.trial = t;
                rec.nmse_db = rec.runtime_ms = rec.kappa = nan();
                out.push_back(rec);
            }
        }
    };

    const int workers = std::max(1, std::min<int>(exp.jobs, static_cast<int>(n_units)));
    if (workers == 1)
    {
        for (std::size_t u = 0; u < n_units; ++u)
            run_unit(u);
    }
    else
    {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t u = next++; u < n_units; u = next++)
                    run_unit(u);
            });
        for (auto &th : pool)
            th.join();
    }

    std::vector<TrialRecord> records;
    records.reserve(n_units * methods.size());
    for (auto &unit : results)
        for (auto &r : unit)
            records.push_back(std::move(r));
    return records;
}

double axis_value(const TrialRecord &r, SweepAxis axis)
{
    switch (axis)
    {
    case SweepAxis::pilot_length:
        return r.pilot_length;
    case SweepAxis::snr:
        return r.snr_db;
    case SweepAxis::bias:
        return r.bias_std;
    }
    return r.pilot_length;
}

SweepAxis infer_axis(std::span<const TrialRecord> records)
{
    for (SweepAxis axis : {SweepAxis::pilot_length, SweepAxis::snr, SweepAxis::bias})
        for (const auto &r : records)
            if (!same_double(axis_value(r, axis), axis_value(records.front(), axis)))
                return axis;
    return SweepAxis::pilot_length;
}

std::vector<ConditionSummary> aggregate(std::span<const TrialRecord> records, SweepAxis axis)
{
    std::vector<std::string> method_order;
    std::map<std::pair<double, std::size_t>, std::vector<const TrialRecord *>> groups;
    for (const auto &r : records)
    {
        auto it = std::find(method_order.begin(), method_order.end(), r.method);
        const std::size_t idx = static_cast<std::size_t>(it - method_order.begin());
        if (it == method_order.end())
            method_order.push_back(r.method);
        groups[{axis_value(r, axis), idx}].push_back(&r);
    }

    std::vector<ConditionSummary> out;
    for (const auto &[key, members] : groups)
    {
        ConditionSummary s;
        s.x = key.first;
        s.method = method_order[key.second];
        double lin = 0.0;
        double db = 0.0;
        std::vector<double> runtimes;
        for (const auto *r : members)
        {
            if (r->failed())
            {
                ++s.failed;
                continue;
            }
            ++s.count;
            lin += std::pow(10.0, r->nmse_db / 10.0);
            db += r->nmse_db;
            if (std::isfinite(r->runtime_ms))
                runtimes.push_back(r->runtime_ms);
        }
        if (s.count > 0)
        {
            s.nmse_db = to_db(lin / s.count);
            s.mean_of_db = db / s.count;
        }
        else
        {
            s.nmse_db = s.mean_of_db = nan();
        }
        if (!runtimes.empty())
        {
            std::sort(runtimes.begin(), runtimes.end());
            const std::size_t n = runtimes.size();
            s.median_runtime_ms = n % 2 ? runtimes[n / 2] : 0.5 * (runtimes[n / 2 - 1] + runtimes[n / 2]);
        }
        else
        {
            s.median_runtime_ms = nan();
        }
        out.push_back(s);
    }
    return out;
}

namespace
{

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true)
    {
        const auto end = line.find(',', start);
        if (end == std::string_view::npos)
        {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return fields;
}

// from_chars rejects a leading '+', which to_chars never emits.
template <class T> bool parse_number(std::string_view s, T &out)
{
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

} // namespace

std::string results_to_string(std::span<const TrialRecord> records)
{
    std::ostringstream out;
    out << results_header << '\n';
    for (const auto &r : records)
    {
        out << r.method << ',' << r.pilot_length << ',' << format_double(r.snr_db) << ',' << format_double(r.bias_std)
            << ',' << r.location << ',' << r.trial << ',' << r.seed << ',' << format_double(r.nmse_db) << ','
            << format_double(r.runtime_ms) << ',' << format_double(r.kappa) << ',' << (r.regularized ? 1 : 0) << ','
            << r.support_size << '\n';
    }
    return out.str();
}

std::vector<TrialRecord> results_from_string(const std::string &text)
{
    std::vector<TrialRecord> records;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line))
    {
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!header_seen)
        {
            if (line != results_header)
                throw IoError("results line 1: unexpected header '" + line + "'");
            header_seen = true;
            continue;
        }
        if (line.empty())
            continue;
        const auto f = split_fields(line);
        auto fail = [&](const std::string &why) {
            return IoError("results line " + std::to_string(line_no) + ": " + why);
        };
        if (f.size() != 12)
            throw fail("expected 12 fields, found " + std::to_string(f.size()));
        TrialRecord r;
        r.method = std::string(f[0]);
        int regularized = 0;
        if (r.method.empty())
            throw fail("empty method name");
        if (!parse_number(f[1], r.pilot_length) || !parse_number(f[2], r.snr_db) || !parse_number(f[3], r.bias_std) ||
            !parse_number(f[4], r.location) || !parse_number(f[5], r.trial) || !parse_number(f[6], r.seed) ||
            !parse_number(f[7], r.nmse_db) || !parse_number(f[8], r.runtime_ms) || !parse_number(f[9], r.kappa) ||
            !parse_number(f[10], regularized) || !parse_number(f[11], r.support_size))
            throw fail("malformed numeric field");
        if (regularized != 0 && regularized != 1)
            throw fail("regularized must be 0 or 1");
        r.regularized = regularized == 1;
        records.push_back(std::move(r));
    }
    if (!header_seen)
        throw IoError("results line 1: missing header");
    return records;
}

void save_results(const std::filesystem::path &file, std::span<const TrialRecord> records)
{
    write_text_file(file, results_to_string(records));
}

std::vector<TrialRecord> load_results(const std::filesystem::path &file)
{
    return results_from_string(read_text_file(file));
}

} // namespace charm
