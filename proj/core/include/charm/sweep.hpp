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
#include "charm/baselines.hpp"
#include "charm/estimator.hpp"
#include "charm/scenario.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace charm
{

enum class Method
{
    charm,
    charm_trust,
    charm_norefine,
    omp3d,
    lmmse,
    kron_omp,
};

std::string_view method_name(Method m);
// Throws ConfigError naming the valid methods.
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view comma_separated);
const std::vector<Method> &all_methods();

enum class SweepAxis
{
    pilot_length,
    snr,
    bias,
};

std::string_view axis_name(SweepAxis a);
SweepAxis parse_axis(std::string_view name);

struct Condition
{
    int pilot_length = 4;
    double snr_db = 20.0;
    double bias_std = 0.0;
};

struct SweepSpec
{
    SweepAxis axis = SweepAxis::pilot_length;
    std::vector<double> values;
    Condition fixed;

    Condition at(std::size_t index) const;
    void validate(const SystemConfig &cfg) const;
};

struct ExperimentConfig
{
    SystemConfig system;
    ScenarioConfig scenario;
    EstimatorConfig estimator;
    Omp3dConfig omp;
    LmmseConfig lmmse;
    PilotMode pilot_mode = PilotMode::evenly_spaced;
    double threshold_db = 10.0;
    int jobs = 1;

    void validate() const;
};

// Everything one (condition, location, trial) cell feeds to the estimators.
struct TrialInputs
{
    Condition condition;
    int location = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    MultipathSet biased_map;
    PilotMatrix pilots;
    ChannelTensor h;
    RxObservations y;
};

TrialInputs make_trial(const ExperimentConfig &exp, const Location &loc, const Condition &cond, int trial);

// The support a CHARM variant extracts for a trial: peaks from the location's radio
// map, refinement against the trial's biased copy.
PathSupport charm_support(const ExperimentConfig &exp, Method m, const Location &loc, const TrialInputs &trial);

struct TrialRecord
{
    std::string method;
    int pilot_length = 0;
    double snr_db = 0.0;
    double bias_std = 0.0;
    int location = 0;
    int trial = 0;
    std::uint64_t seed = 0;
    double nmse_db = 0.0; // NaN marks a failed estimator call
    double runtime_ms = 0.0;
    double kappa = 0.0; // NaN for estimators without a projection
    bool regularized = false;
    int support_size = 0;

    bool failed() const;
    // Field-wise equality treating NaN == NaN; runtime optionally ignored.
    bool same_as(const TrialRecord &other, bool compare_runtime = true) const;
};

// Generator-wide Kronecker covariance from the LMMSE training draws.
KronCovariance training_covariance(const ExperimentConfig &exp);

TrialRecord run_method(const ExperimentConfig &exp, Method m, const Location &loc, const TrialInputs &trial,
                       const KronCovariance *shared_covariance);

std::vector<Location> generate_locations(const ExperimentConfig &exp);

// Full factorial over (condition x location x trial x method). Every method in a
// trial consumes the same pilots and observations. Records come back sorted by
// (condition, location, trial, method order). Empty `locations` means generate them.
std::vector<TrialRecord> run_sweep(const ExperimentConfig &exp, const SweepSpec &spec, std::span<const Method> methods,
                                   std::span<const Location> locations = {});

struct ConditionSummary
{
    std::string method;
    double x = 0.0;
    int count = 0;
    int failed = 0;
    double nmse_db = 0.0;         // dB of the mean linear NMSE
    double mean_of_db = 0.0;      // mean of per-trial dB values
    double median_runtime_ms = 0.0;
};

double axis_value(const TrialRecord &r, SweepAxis axis);
// The axis whose value varies across records; pilot length when nothing varies.
SweepAxis infer_axis(std::span<const TrialRecord> records);

// Groups by (axis value, method) in ascending x, methods in first-seen order.
std::vector<ConditionSummary> aggregate(std::span<const TrialRecord> records, SweepAxis axis);

inline constexpr const char *results_header =
    "method,T,snr_db,bias_std,location,trial,seed,nmse_db,runtime_ms,kappa,regularized,support_size";

std::string results_to_string(std::span<const TrialRecord> records);
// Throws IoError naming the offending line.
std::vector<TrialRecord> results_from_string(const std::string &text);

void save_results(const std::filesystem::path &file, std::span<const TrialRecord> records);
std::vector<TrialRecord> load_results(const std::filesystem::path &file);

} // namespace charm
