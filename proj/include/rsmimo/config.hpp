// SPDX-License-Identifier: Apache-2.0
//
// rsmimo c++ simulation library for rate-splitting transmission in the massive MIMO downlink
// Copyright (C) 2026 rsmimo developers
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

#ifndef rsmimo_config_H
#define rsmimo_config_H

#include <algorithm>
#include <armadillo>
#include <cstdint>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsmimo/common.hpp"
#include "rsmimo/simulate.hpp"

namespace rsmimo
{

using ordered_json = nlohmann::ordered_json;

// ---------- EXPERIMENT CONFIGURATION ----------

// A complete experiment: geometry, CSIT quality, SNR grid, scheme list, and run
// controls. The axes tau_sq, spread, and users (single-tier layout only) may hold
// several values; every combination becomes one output file.
struct ExperimentConfig
{
    std::string name = "experiment";
    arma::uword antennas = 0;

    // single-tier layout: users spread over the full circle (sweepable)
    arma::uvec users_values;

    // grouped layout: fixed clusters on an arc, effective dimensions per group
    arma::uvec users_per_group;
    arma::uvec dims_b;
    arma::uword dominant_rank = 0;

    arma::vec tau_sq_values;
    arma::vec spread_values;
    arma::vec snr_db;
    std::vector<SchemeTag> schemes;

    arma::uword trials = 500;
    std::uint64_t seed = 1;
    double mu = 0.9;
    double grid_step = 0.01;
    arma::uword quadrature_points = 200;
    bool exact_power_split = false;
    bool kappa_per_group_users = false;
    bool emit_asymptotics = true;
    unsigned workers = 0;
    std::string output_dir = "results";

    bool grouped() const
    {
        return users_per_group.n_elem > 0;
    }
};

// ---------- VALIDATION ----------

// Checks every structural constraint and reports all violations at once
inline void validate_config(const ExperimentConfig &cfg)
{
    std::vector<std::string> issues;
    const auto flag = [&issues](const std::string &msg) { issues.push_back(msg); };

    if (cfg.name.empty())
        flag("name must not be empty");
    if (cfg.antennas == 0)
        flag("antennas must be positive");

    const bool ring = cfg.users_values.n_elem > 0;
    const bool grouped = cfg.users_per_group.n_elem > 0;
    if (ring == grouped)
        flag("exactly one of users and users_per_group must be set");

    if (ring)
    {
        for (arma::uword i = 0; i < cfg.users_values.n_elem; ++i)
        {
            if (cfg.users_values(i) == 0)
                flag("users must be positive");
            else if (cfg.users_values(i) > cfg.antennas)
                flag("users exceeds antennas (K = " + std::to_string(cfg.users_values(i)) + ")");
        }
        for (SchemeTag tag : cfg.schemes)
            if (scheme_needs_groups(tag))
                flag(std::string("scheme ") + scheme_name(tag) +
                     " requires the grouped layout");
    }

    if (grouped)
    {
        const arma::uword g_count = cfg.users_per_group.n_elem;
        if (g_count < 2)
            flag("at least two groups required");
        if (cfg.dims_b.n_elem != g_count)
            flag("dims_b must hold one entry per group");
        if (cfg.dominant_rank == 0)
            flag("dominant_rank must be positive");
        for (arma::uword g = 0; g < g_count && cfg.dims_b.n_elem == g_count; ++g)
        {
            if (cfg.users_per_group(g) == 0)
                flag("users_per_group entries must be positive");
            if (cfg.users_per_group(g) > cfg.dims_b(g))
                flag("K_g exceeds b_g (group " + std::to_string(g) + ")");
            if (cfg.dims_b(g) + (g_count - 1) * cfg.dominant_rank > cfg.antennas)
                flag("b_g exceeds M - sum_{l != g} r^d_l (group " + std::to_string(g) + ")");
        }
    }

    if (cfg.tau_sq_values.n_elem == 0)
        flag("tau_sq must hold at least one value");
    for (arma::uword i = 0; i < cfg.tau_sq_values.n_elem; ++i)
        if (cfg.tau_sq_values(i) < 0.0 || cfg.tau_sq_values(i) >= 1.0)
            flag("tau_sq values must lie in [0,1)");

    if (cfg.spread_values.n_elem == 0)
        flag("spread must hold at least one value");
    for (arma::uword i = 0; i < cfg.spread_values.n_elem; ++i)
        if (!(cfg.spread_values(i) > 0.0) || cfg.spread_values(i) > pi)
            flag("spread values must lie in (0, pi]");

    if (cfg.snr_db.n_elem == 0)
        flag("snr_db must hold at least one value");
    for (arma::uword i = 1; i < cfg.snr_db.n_elem; ++i)
        if (!(cfg.snr_db(i) > cfg.snr_db(i - 1)))
            flag("snr_db grid must be strictly increasing");

    if (cfg.schemes.empty())
        flag("schemes must hold at least one entry");
    if (cfg.trials == 0)
        flag("trials must be positive");
    if (!(cfg.mu > 0.0) || cfg.mu > 1.0)
        flag("mu must lie in (0,1]");
    if (!(cfg.grid_step > 0.0) || !(cfg.grid_step < 1.0))
        flag("grid_step must lie in (0,1)");
    if (cfg.quadrature_points < 2)
        flag("quadrature_points must be at least 2");
    if (cfg.output_dir.empty())
        flag("output_dir must not be empty");

    if (!issues.empty())
    {
        std::string joined = "invalid configuration:";
        for (const std::string &s : issues)
            joined += "\n  - " + s;
        throw std::invalid_argument(joined);
    }
}

// ---------- JSON SERIALIZATION ----------

namespace detail
{

inline ordered_json vec_to_json(const arma::vec &v)
{
    ordered_json arr = ordered_json::array();
    for (arma::uword i = 0; i < v.n_elem; ++i)
        arr.push_back(v(i));
    return arr;
}

inline ordered_json uvec_to_json(const arma::uvec &v)
{
    ordered_json arr = ordered_json::array();
    for (arma::uword i = 0; i < v.n_elem; ++i)
        arr.push_back((std::uint64_t)v(i));
    return arr;
}

inline arma::vec json_to_vec(const ordered_json &v, const std::string &key)
{
    if (v.is_number())
        return arma::vec{v.get<double>()};
    if (!v.is_array() || v.empty())
        throw std::invalid_argument("field '" + key + "' must be a number or a nonempty array");
    arma::vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (!v[i].is_number())
            throw std::invalid_argument("field '" + key + "' must hold numbers only");
        out(i) = v[i].get<double>();
    }
    return out;
}

inline arma::uvec json_to_uvec(const ordered_json &v, const std::string &key)
{
    const auto check = [&key](const ordered_json &x) {
        if (!x.is_number_integer() || x.get<std::int64_t>() < 0)
            throw std::invalid_argument("field '" + key + "' must hold nonnegative integers");
    };
    if (v.is_number())
    {
        check(v);
        return arma::uvec{(arma::uword)v.get<std::uint64_t>()};
    }
    if (!v.is_array() || v.empty())
        throw std::invalid_argument("field '" + key + "' must be an integer or a nonempty array");
    arma::uvec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        check(v[i]);
        out(i) = (arma::uword)v[i].get<std::uint64_t>();
    }
    return out;
}

} // namespace detail

// Canonical serialization; the manifest embeds and hashes exactly this form
inline ordered_json to_json(const ExperimentConfig &cfg)
{
    ordered_json j;
    j["schema_version"] = 1;
    j["name"] = cfg.name;
    j["antennas"] = (std::uint64_t)cfg.antennas;
    if (cfg.grouped())
    {
        j["users_per_group"] = detail::uvec_to_json(cfg.users_per_group);
        j["dims_b"] = detail::uvec_to_json(cfg.dims_b);
        j["dominant_rank"] = (std::uint64_t)cfg.dominant_rank;
    }
    else
        j["users"] = detail::uvec_to_json(cfg.users_values);
    j["spread"] = detail::vec_to_json(cfg.spread_values);
    j["tau_sq"] = detail::vec_to_json(cfg.tau_sq_values);
    j["snr_db"] = detail::vec_to_json(cfg.snr_db);
    ordered_json schemes = ordered_json::array();
    for (SchemeTag tag : cfg.schemes)
        schemes.push_back(scheme_name(tag));
    j["schemes"] = schemes;
    j["trials"] = (std::uint64_t)cfg.trials;
    j["seed"] = cfg.seed;
    j["mu"] = cfg.mu;
    j["grid_step"] = cfg.grid_step;
    j["quadrature_points"] = (std::uint64_t)cfg.quadrature_points;
    j["exact_power_split"] = cfg.exact_power_split;
    j["kappa_per_group_users"] = cfg.kappa_per_group_users;
    j["emit_asymptotics"] = cfg.emit_asymptotics;
    j["workers"] = cfg.workers;
    j["output_dir"] = cfg.output_dir;
    return j;
}

// Builds a validated configuration from parsed structured text
inline ExperimentConfig config_from_json(const ordered_json &j)
{
    if (!j.is_object())
        throw std::invalid_argument("configuration root must be an object");
    if (!j.contains("schema_version") || !j["schema_version"].is_number_integer() ||
        j["schema_version"].get<int>() != 1)
        throw std::invalid_argument("schema_version must be present and equal to 1");

    static const std::vector<std::string> known = {
        "schema_version", "name",       "antennas",          "users",
        "users_per_group", "dims_b",    "dominant_rank",     "spread",
        "tau_sq",          "snr_db",    "schemes",           "trials",
        "seed",            "mu",        "grid_step",         "quadrature_points",
        "exact_power_split", "kappa_per_group_users", "emit_asymptotics", "workers",
        "output_dir"};
    std::vector<std::string> unknown;
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            unknown.push_back(it.key());
    if (!unknown.empty())
    {
        std::string msg = "unknown configuration keys:";
        for (const std::string &k : unknown)
            msg += " '" + k + "'";
        throw std::invalid_argument(msg);
    }

    ExperimentConfig cfg;
    if (j.contains("name"))
        cfg.name = j["name"].get<std::string>();
    if (j.contains("antennas"))
        cfg.antennas = (arma::uword)j["antennas"].get<std::uint64_t>();

    if (j.contains("users"))
        cfg.users_values = detail::json_to_uvec(j["users"], "users");
    if (j.contains("users_per_group"))
        cfg.users_per_group = detail::json_to_uvec(j["users_per_group"], "users_per_group");
    if (j.contains("dims_b"))
    {
        cfg.dims_b = detail::json_to_uvec(j["dims_b"], "dims_b");
        // a scalar effective dimension applies to every group
        if (cfg.dims_b.n_elem == 1 && cfg.users_per_group.n_elem > 1)
            cfg.dims_b = arma::uvec(cfg.users_per_group.n_elem, arma::fill::value(cfg.dims_b(0)));
    }
    if (j.contains("dominant_rank"))
    {
        const arma::uvec r = detail::json_to_uvec(j["dominant_rank"], "dominant_rank");
        for (arma::uword i = 1; i < r.n_elem; ++i)
            if (r(i) != r(0))
                throw std::invalid_argument("dominant_rank must be uniform across groups");
        cfg.dominant_rank = r(0);
    }

    if (j.contains("spread"))
        cfg.spread_values = detail::json_to_vec(j["spread"], "spread");
    if (j.contains("tau_sq"))
        cfg.tau_sq_values = detail::json_to_vec(j["tau_sq"], "tau_sq");

    if (j.contains("snr_db"))
    {
        const ordered_json &s = j["snr_db"];
        if (s.is_object())
        {
            for (auto it = s.begin(); it != s.end(); ++it)
                if (it.key() != "start" && it.key() != "stop" && it.key() != "step")
                    throw std::invalid_argument("snr_db range takes only start, stop, step");
            if (!s.contains("start") || !s.contains("stop") || !s.contains("step"))
                throw std::invalid_argument("snr_db range requires start, stop, step");
            const double start = s["start"].get<double>();
            const double stop = s["stop"].get<double>();
            const double step = s["step"].get<double>();
            if (!(step > 0.0) || stop < start)
                throw std::invalid_argument("snr_db range requires step > 0 and stop >= start");
            std::vector<double> grid;
            for (double v = start; v <= stop + 1e-9; v += step)
                grid.push_back(v);
            cfg.snr_db = arma::vec(grid);
        }
        else
            cfg.snr_db = detail::json_to_vec(s, "snr_db");
    }

    if (j.contains("schemes"))
    {
        if (!j["schemes"].is_array())
            throw std::invalid_argument("schemes must be an array of scheme names");
        for (const auto &s : j["schemes"])
            cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
    }

    if (j.contains("trials"))
        cfg.trials = (arma::uword)j["trials"].get<std::uint64_t>();
    if (j.contains("seed"))
        cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("mu"))
        cfg.mu = j["mu"].get<double>();
    if (j.contains("grid_step"))
        cfg.grid_step = j["grid_step"].get<double>();
    if (j.contains("quadrature_points"))
        cfg.quadrature_points = (arma::uword)j["quadrature_points"].get<std::uint64_t>();
    if (j.contains("exact_power_split"))
        cfg.exact_power_split = j["exact_power_split"].get<bool>();
    if (j.contains("kappa_per_group_users"))
        cfg.kappa_per_group_users = j["kappa_per_group_users"].get<bool>();
    if (j.contains("emit_asymptotics"))
        cfg.emit_asymptotics = j["emit_asymptotics"].get<bool>();
    if (j.contains("workers"))
        cfg.workers = j["workers"].get<unsigned>();
    if (j.contains("output_dir"))
        cfg.output_dir = j["output_dir"].get<std::string>();

    validate_config(cfg);
    return cfg;
}

inline ExperimentConfig load_config(std::istream &in)
{
    ordered_json j;
    try
    {
        j = ordered_json::parse(in);
    }
    catch (const nlohmann::json::parse_error &e)
    {
        throw std::invalid_argument(std::string("configuration is not valid structured text: ") +
                                    e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open configuration file '" + path + "'");
    return load_config(in);
}

// ---------- PRESET CATALOG ----------

// Ready-made experiments covering the standard evaluation plots
inline std::vector<ExperimentConfig> preset_catalog()
{
    std::vector<ExperimentConfig> presets;

    const auto ring_base = [](const std::string &name) {
        ExperimentConfig cfg;
        cfg.name = name;
        cfg.antennas = 100;
        cfg.users_values = arma::uvec{5};
        cfg.spread_values = arma::vec{pi / 6.0};
        cfg.snr_db = arma::regspace(0.0, 5.0, 35.0);
        return cfg;
    };
    const auto grouped_base = [](const std::string &name) {
        ExperimentConfig cfg;
        cfg.name = name;
        cfg.antennas = 100;
        cfg.users_per_group = arma::uvec{3, 3, 3, 3};
        cfg.dims_b = arma::uvec(4, arma::fill::value(15));
        cfg.dominant_rank = 20;
        cfg.snr_db = arma::regspace(0.0, 5.0, 35.0);
        cfg.exact_power_split = true;
        cfg.mu = 1.0; // no private margin: the blended rule then meets the strong-regime one
        return cfg;
    };

    // splitting versus the large-system limit, perfect and degraded knowledge
    {
        ExperimentConfig cfg = ring_base("fig_rs_validation");
        cfg.tau_sq_values = arma::vec{0.0, 0.4};
        cfg.schemes = {SchemeTag::rs_clf};
        presets.push_back(cfg);
    }

    // splitting against plain broadcasting and round robin under degraded knowledge
    {
        ExperimentConfig cfg = ring_base("fig_rs_vs_bc");
        cfg.tau_sq_values = arma::vec{0.4};
        cfg.schemes = {SchemeTag::rs_clf, SchemeTag::rs_exs, SchemeTag::bc_rzf, SchemeTag::tdma};
        presets.push_back(cfg);
    }

    // splitting gain versus the antenna-to-user ratio at fixed SNR
    {
        ExperimentConfig cfg = ring_base("fig_gain_vs_eta");
        cfg.users_values = arma::uvec{2, 4, 5, 10, 20, 25, 50};
        cfg.tau_sq_values = arma::vec{0.5};
        cfg.snr_db = arma::vec{30.0};
        cfg.schemes = {SchemeTag::rs_clf, SchemeTag::bc_rzf};
        presets.push_back(cfg);
    }

    // splitting with matched-beamforming private streams
    {
        ExperimentConfig cfg = ring_base("fig_rs_mbf");
        cfg.tau_sq_values = arma::vec{0.5};
        cfg.schemes = {SchemeTag::rs_mbf, SchemeTag::bc_rzf};
        presets.push_back(cfg);
    }

    // layered splitting versus its large-system limit, clustered and overlapping
    {
        ExperimentConfig cfg = grouped_base("fig_hrs_as");
        cfg.spread_values = arma::vec{pi / 8.0, pi / 3.0};
        cfg.tau_sq_values = arma::vec{0.0, 0.4};
        cfg.schemes = {SchemeTag::hrs_clf, SchemeTag::ttp};
        presets.push_back(cfg);
    }

    // layered splitting against scheduling baselines
    {
        ExperimentConfig cfg = grouped_base("fig_hrs_baselines");
        cfg.spread_values = arma::vec{pi / 8.0, pi / 3.0};
        cfg.tau_sq_values = arma::vec{0.4};
        cfg.schemes = {SchemeTag::hrs_clf, SchemeTag::hrs_exs, SchemeTag::ttp,
                       SchemeTag::baseline2, SchemeTag::baseline3};
        presets.push_back(cfg);
    }

    // knowledge-quality sweep at fixed SNR
    {
        ExperimentConfig cfg = grouped_base("fig_tau_sweep");
        cfg.spread_values = arma::vec{pi / 8.0};
        cfg.tau_sq_values = arma::regspace(0.0, 0.1, 0.9);
        cfg.snr_db = arma::vec{30.0};
        cfg.schemes = {SchemeTag::bc_rzf, SchemeTag::rs_clf, SchemeTag::ttp, SchemeTag::hrs_clf};
        presets.push_back(cfg);
    }

    for (const ExperimentConfig &cfg : presets)
        validate_config(cfg);
    return presets;
}

inline ExperimentConfig find_preset(const std::string &name)
{
    for (const ExperimentConfig &cfg : preset_catalog())
        if (cfg.name == name)
            return cfg;
    std::string names;
    for (const ExperimentConfig &cfg : preset_catalog())
        names += " " + cfg.name;
    throw std::invalid_argument("unknown preset '" + name + "'; available:" + names);
}

} // namespace rsmimo

#endif
