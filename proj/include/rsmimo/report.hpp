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

#ifndef rsmimo_report_H
#define rsmimo_report_H

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "rsmimo/config.hpp"
#include "rsmimo/simulate.hpp"

namespace rsmimo
{

inline const char *tool_version()
{
    return "0.1.0";
}

// ---------- VALUE FORMATTING ----------

// Floating values carry 12 significant digits; integers print as integers
inline std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---------- CSV ROWS ----------

// One line of the results schema. The column set is fixed; quantities that do not
// apply to a scheme hold their neutral values (split 1, components 0).
struct CsvRow
{
    double snr_db = 0.0;
    std::string scheme;
    double sum_rate_mean = 0.0, sum_rate_stderr = 0.0;
    double rate_common_outer = 0.0, rate_common_inner = 0.0, rate_private = 0.0;
    double split_t = 1.0, split_alpha = 1.0, split_beta = 1.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

inline const char *csv_header()
{
    return "snr_db,scheme,sum_rate_mean,sum_rate_stderr,rate_common_outer,rate_common_inner,"
           "rate_private,split_t,split_alpha,split_beta,trials,seed";
}

inline std::string csv_line(const CsvRow &row)
{
    std::string out = format_value(row.snr_db);
    out += ',';
    out += row.scheme;
    for (double v : {row.sum_rate_mean, row.sum_rate_stderr, row.rate_common_outer,
                     row.rate_common_inner, row.rate_private, row.split_t, row.split_alpha,
                     row.split_beta})
    {
        out += ',';
        out += format_value(v);
    }
    out += ',' + std::to_string(row.trials);
    out += ',' + std::to_string(row.seed);
    return out;
}

inline std::string serialize_csv(const std::vector<CsvRow> &rows)
{
    std::string out = csv_header();
    out += '\n';
    for (const CsvRow &row : rows)
    {
        out += csv_line(row);
        out += '\n';
    }
    return out;
}

// Reads a results file back; numbers reparse to the printed values exactly
inline std::vector<CsvRow> parse_csv(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open results file '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw std::invalid_argument("results file '" + path + "' has an unexpected header");

    std::vector<CsvRow> rows;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ','))
            cells.push_back(cell);
        if (cells.size() != 12)
            throw std::invalid_argument("results file '" + path + "' has a malformed row");
        CsvRow row;
        row.snr_db = std::stod(cells[0]);
        row.scheme = cells[1];
        row.sum_rate_mean = std::stod(cells[2]);
        row.sum_rate_stderr = std::stod(cells[3]);
        row.rate_common_outer = std::stod(cells[4]);
        row.rate_common_inner = std::stod(cells[5]);
        row.rate_private = std::stod(cells[6]);
        row.split_t = std::stod(cells[7]);
        row.split_alpha = std::stod(cells[8]);
        row.split_beta = std::stod(cells[9]);
        row.trials = std::stoull(cells[10]);
        row.seed = std::stoull(cells[11]);
        rows.push_back(row);
    }
    return rows;
}

// ---------- HASHING AND ATOMIC WRITES ----------

inline std::string sha256_hex(const std::string &data)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256_hex: digest computation failed");
    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i)
    {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0x0F];
    }
    return out;
}

// Writes through a temporary sibling and renames, so readers never observe a
// partially written file
inline void write_text_atomic(const std::filesystem::path &path, const std::string &content)
{
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("short write on '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

// ---------- RUN MANIFEST ----------

struct ManifestFile
{
    std::string name;
    std::string sha256;
    std::uint64_t rows = 0;
};

// Provenance record sealed after all results are on disk; a results directory
// without a manifest is incomplete.
struct RunManifest
{
    std::string name;
    ordered_json config;
    std::string config_sha256;
    std::string tool;
    std::string started_utc;
    double wall_seconds = 0.0;
    unsigned workers = 0;
    std::vector<ManifestFile> files;
};

inline ordered_json to_json(const RunManifest &m)
{
    ordered_json j;
    j["schema_version"] = 1;
    j["name"] = m.name;
    j["config"] = m.config;
    j["config_sha256"] = m.config_sha256;
    j["tool_version"] = m.tool;
    j["started_utc"] = m.started_utc;
    j["wall_seconds"] = m.wall_seconds;
    j["workers"] = m.workers;
    ordered_json files = ordered_json::array();
    for (const ManifestFile &f : m.files)
    {
        ordered_json e;
        e["name"] = f.name;
        e["sha256"] = f.sha256;
        e["rows"] = f.rows;
        files.push_back(e);
    }
    j["files"] = files;
    return j;
}

namespace detail
{

inline std::string utc_timestamp()
{
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

// Compact numeric tag for sweep-axis values embedded in file names
inline std::string axis_tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

} // namespace detail

// ---------- EXPERIMENT RUNNER ----------

struct RunOutput
{
    std::filesystem::path manifest_path;
    std::vector<std::filesystem::path> csv_paths;
};

// Runs every sweep combination of a validated configuration and emits one results
// file per combination plus the sealed manifest. File contents depend only on the
// configuration and seed, never on the worker count.
inline RunOutput run_experiment(const ExperimentConfig &cfg)
{
    validate_config(cfg);
    const auto t0 = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.name = cfg.name;
    manifest.config = to_json(cfg);
    manifest.config_sha256 = sha256_hex(manifest.config.dump());
    manifest.tool = tool_version();
    manifest.started_utc = detail::utc_timestamp();
    manifest.workers = cfg.workers;

    const std::filesystem::path out_dir(cfg.output_dir);
    std::filesystem::create_directories(out_dir);

    RunOutput output;
    const arma::uvec user_axis = cfg.grouped() ? arma::uvec{0} : cfg.users_values;

    for (arma::uword iu = 0; iu < user_axis.n_elem; ++iu)
        for (arma::uword it = 0; it < cfg.tau_sq_values.n_elem; ++it)
            for (arma::uword is = 0; is < cfg.spread_values.n_elem; ++is)
            {
                const double tau_sq = cfg.tau_sq_values(it);
                const double tau = std::sqrt(tau_sq);
                const double spread = cfg.spread_values(is);

                Scenario sc;
                if (cfg.grouped())
                    sc = two_tier_scenario(cfg.antennas, cfg.users_per_group, cfg.dims_b,
                                           cfg.dominant_rank, spread,
                                           arma::vec(cfg.users_per_group.n_elem,
                                                     arma::fill::value(tau)),
                                           cfg.quadrature_points);
                else
                    sc = one_tier_scenario(cfg.antennas, user_axis(iu), spread,
                                           arma::vec(user_axis(iu), arma::fill::value(tau)),
                                           cfg.quadrature_points);

                // every scheme over the full grid, then rows grouped per SNR point
                std::vector<RateReport> reports;
                std::vector<std::vector<RatePoint>> limits;
                for (SchemeTag tag : cfg.schemes)
                {
                    SchemeSpec spec;
                    spec.tag = tag;
                    spec.grid_step = cfg.grid_step;
                    spec.mu = cfg.mu;
                    spec.exact_power_split = cfg.exact_power_split;
                    spec.kappa_per_group_users = cfg.kappa_per_group_users;
                    reports.push_back(run_trials(sc, spec, cfg.snr_db, cfg.trials, cfg.seed,
                                                 cfg.workers));
                    limits.push_back(cfg.emit_asymptotics
                                         ? asymptotic_points(sc, spec, cfg.snr_db)
                                         : std::vector<RatePoint>{});
                }

                std::vector<CsvRow> rows;
                const auto push_row = [&](const RatePoint &pt, const std::string &label,
                                          std::uint64_t trials) {
                    CsvRow row;
                    row.snr_db = pt.snr_db;
                    row.scheme = label;
                    row.sum_rate_mean = pt.sum_rate_mean;
                    row.sum_rate_stderr = pt.sum_rate_stderr;
                    row.rate_common_outer = pt.rate_common_outer;
                    row.rate_common_inner = pt.rate_common_inner;
                    row.rate_private = pt.rate_private;
                    row.split_t = pt.split_t;
                    row.split_alpha = pt.split_alpha;
                    row.split_beta = pt.split_beta;
                    row.trials = trials;
                    row.seed = cfg.seed;
                    rows.push_back(row);
                };
                for (arma::uword s = 0; s < cfg.snr_db.n_elem; ++s)
                {
                    for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
                        push_row(reports[i].points[s], scheme_name(cfg.schemes[i]), cfg.trials);
                    for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
                        if (!limits[i].empty())
                            push_row(limits[i][s],
                                     std::string(scheme_name(cfg.schemes[i])) + "_AS", 0);
                }

                std::string fname = cfg.name;
                if (!cfg.grouped() && user_axis.n_elem > 1)
                    fname += "_K" + std::to_string(user_axis(iu));
                if (cfg.tau_sq_values.n_elem > 1)
                    fname += "_tau" + detail::axis_tag(tau_sq);
                if (cfg.spread_values.n_elem > 1)
                    fname += "_delta" + detail::axis_tag(spread);
                fname += ".csv";

                const std::string content = serialize_csv(rows);
                const std::filesystem::path path = out_dir / fname;
                write_text_atomic(path, content);
                output.csv_paths.push_back(path);
                manifest.files.push_back({fname, sha256_hex(content),
                                          (std::uint64_t)rows.size()});
            }

    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    output.manifest_path = out_dir / (cfg.name + "_manifest.json");
    write_text_atomic(output.manifest_path, to_json(manifest).dump(2) + "\n");
    return output;
}

} // namespace rsmimo

#endif
