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

#include "charm/io.hpp"
#include "charm/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace charm
{

using nlohmann::json;

namespace
{

json parse_document(const std::string &text, const char *expected_schema)
{
    json doc;
    try
    {
        doc = json::parse(text, nullptr, true, true);
    }
    catch (const json::parse_error &e)
    {
        throw IoError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema") || doc["schema"] != expected_schema)
        throw IoError(std::string("expected schema ") + expected_schema);
    return doc;
}

template <class F> auto guarded(F &&f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const json::exception &e)
    {
        throw IoError(std::string("invalid document: ") + e.what());
    }
}

} // namespace

std::string read_text_file(const std::filesystem::path &file)
{
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path &file, const std::string &text)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + file.string());
    out << text;
    if (!out)
        throw IoError("write failed for " + file.string());
}

std::string scenario_to_string(const Location &loc)
{
    json doc;
    doc["schema"] = scenario_schema;
    doc["location"] = loc.id;
    doc["seed"] = loc.seed;
    json paths = json::array();
    for (const auto &p : loc.truth.paths)
        paths.push_back({{"gain", {p.gain.real(), p.gain.imag()}}, {"aoa", p.aoa}, {"aod", p.aod}, {"delay", p.delay}});
    doc["paths"] = std::move(paths);
    return doc.dump(2) + "\n";
}

Location scenario_from_string(const std::string &text)
{
    const json doc = parse_document(text, scenario_schema);
    return guarded([&] {
        Location loc;
        loc.id = doc.at("location").get<int>();
        loc.seed = doc.at("seed").get<std::uint64_t>();
        for (const auto &p : doc.at("paths"))
        {
            const auto &g = p.at("gain");
            loc.truth.paths.push_back({cdouble(g.at(0).get<double>(), g.at(1).get<double>()), p.at("aoa").get<double>(),
                                       p.at("aod").get<double>(), p.at("delay").get<double>()});
        }
        loc.radio_map = loc.truth;
        return loc;
    });
}

void save_scenario(const std::filesystem::path &file, const Location &loc)
{
    write_text_file(file, scenario_to_string(loc));
}

Location load_scenario(const std::filesystem::path &file)
{
    return scenario_from_string(read_text_file(file));
}

std::string support_to_string(const PathSupport &support)
{
    json doc;
    doc["schema"] = support_schema;
    doc["refined"] = support.refined;
    doc["trust_clipped"] = support.trust_clipped;
    json peaks = json::array();
    for (const auto &pk : support.peaks)
        peaks.push_back({{"i", pk.i},
                         {"j", pk.j},
                         {"theta_grid", pk.theta_grid},
                         {"u_grid", pk.u_grid},
                         {"tau_grid", pk.tau_grid},
                         {"u_ref", pk.u_ref},
                         {"tau_ref", pk.tau_ref},
                         {"u_hat", pk.u_hat},
                         {"tau_hat", pk.tau_hat},
                         {"power", pk.power}});
    doc["peaks"] = std::move(peaks);
    return doc.dump(2) + "\n";
}

PathSupport support_from_string(const std::string &text)
{
    const json doc = parse_document(text, support_schema);
    return guarded([&] {
        PathSupport support;
        support.refined = doc.at("refined").get<bool>();
        support.trust_clipped = doc.at("trust_clipped").get<bool>();
        for (const auto &p : doc.at("peaks"))
        {
            PeakRecord pk;
            pk.i = p.at("i").get<int>();
            pk.j = p.at("j").get<int>();
            pk.theta_grid = p.at("theta_grid").get<double>();
            pk.u_grid = p.at("u_grid").get<double>();
            pk.tau_grid = p.at("tau_grid").get<double>();
            pk.u_ref = p.at("u_ref").get<double>();
            pk.tau_ref = p.at("tau_ref").get<double>();
            pk.u_hat = p.at("u_hat").get<double>();
            pk.tau_hat = p.at("tau_hat").get<double>();
            pk.power = p.at("power").get<double>();
            support.peaks.push_back(pk);
        }
        return support;
    });
}

void save_support(const std::filesystem::path &file, const PathSupport &support)
{
    write_text_file(file, support_to_string(support));
}

PathSupport load_support(const std::filesystem::path &file)
{
    return support_from_string(read_text_file(file));
}

void save_manifest(const std::filesystem::path &file, std::uint64_t master_seed,
                   const std::vector<ManifestEntry> &entries)
{
    json doc;
    doc["schema"] = manifest_schema;
    doc["master_seed"] = master_seed;
    json list = json::array();
    for (const auto &e : entries)
        list.push_back({{"id", e.id}, {"seed", e.seed}, {"file", e.file}, {"paths", e.paths}});
    doc["locations"] = std::move(list);
    write_text_file(file, doc.dump(2) + "\n");
}

std::vector<Location> load_scenario_directory(const std::filesystem::path &dir)
{
    const json doc = parse_document(read_text_file(dir / "manifest.json"), manifest_schema);
    std::vector<std::string> files = guarded([&] {
        std::vector<std::string> out;
        for (const auto &e : doc.at("locations"))
            out.push_back(e.at("file").get<std::string>());
        return out;
    });
    std::vector<Location> locations;
    for (const auto &f : files)
        locations.push_back(load_scenario(dir / f));
    return locations;
}

} // namespace charm
