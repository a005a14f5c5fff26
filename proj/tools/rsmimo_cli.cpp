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

// Batch front end: resolves a preset or configuration file, applies command-line
// overrides, runs every sweep combination, and seals the result manifest.
// Exit code 0 means every requested file and the manifest are on disk.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rsmimo/config.hpp"
#include "rsmimo/report.hpp"

using namespace rsmimo;

// ---------- TARGET RESOLUTION ----------

// An exact preset name wins; anything else must be a configuration file
static ExperimentConfig resolve_target(const std::string &target)
{
    for (const ExperimentConfig &cfg : preset_catalog())
        if (cfg.name == target)
            return cfg;
    if (std::filesystem::exists(target))
        return load_config_file(target);
    throw std::invalid_argument("'" + target +
                                "' is neither a preset nor a configuration file; see "
                                "list-presets for the catalog");
}

// ---------- OVERRIDES ----------

static arma::vec parse_snr_range(const std::string &text)
{
    double a = 0.0, b = 0.0, step = 0.0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf%c", &a, &b, &step, &tail) != 3)
        throw std::invalid_argument("--snr expects A:B:STEP");
    if (!(step > 0.0) || b < a)
        throw std::invalid_argument("--snr requires STEP > 0 and B >= A");
    std::vector<double> grid;
    for (double v = a; v <= b + 1e-9; v += step)
        grid.push_back(v);
    return arma::vec(grid);
}

static std::vector<SchemeTag> parse_scheme_list(const std::string &text)
{
    std::vector<SchemeTag> schemes;
    std::string::size_type at = 0;
    while (at <= text.size())
    {
        const std::string::size_type comma = text.find(',', at);
        const std::string name = text.substr(at, comma == std::string::npos ? std::string::npos
                                                                            : comma - at);
        if (name.empty())
            throw std::invalid_argument("--schemes holds an empty entry");
        schemes.push_back(parse_scheme(name));
        if (comma == std::string::npos)
            break;
        at = comma + 1;
    }
    return schemes;
}

static unsigned workers_from_environment(unsigned fallback)
{
    const char *raw = std::getenv("RSMIMO_WORKERS");
    if (raw == nullptr || raw[0] == '\0')
        return fallback;
    char *end = nullptr;
    const unsigned long parsed = std::strtoul(raw, &end, 10);
    if (end == raw || *end != '\0')
        throw std::invalid_argument("RSMIMO_WORKERS must be a nonnegative integer");
    return (unsigned)parsed;
}

// ---------- COMMANDS ----------

static int command_list_presets()
{
    for (const ExperimentConfig &cfg : preset_catalog())
    {
        std::string layout;
        if (cfg.grouped())
            layout = "grouped G=" + std::to_string(cfg.users_per_group.n_elem) + " K=" +
                     std::to_string((unsigned long)arma::accu(cfg.users_per_group));
        else
        {
            layout = "ring K=";
            for (arma::uword i = 0; i < cfg.users_values.n_elem; ++i)
                layout += (i ? "/" : "") + std::to_string(cfg.users_values(i));
        }
        std::string schemes;
        for (std::size_t i = 0; i < cfg.schemes.size(); ++i)
            schemes += std::string(i ? "," : "") + scheme_name(cfg.schemes[i]);
        std::printf("%-20s M=%-4llu %-18s snr %g..%g (%llu pts)  tau_sq x%llu  %s\n",
                    cfg.name.c_str(), (unsigned long long)cfg.antennas, layout.c_str(),
                    cfg.snr_db(0), cfg.snr_db(cfg.snr_db.n_elem - 1),
                    (unsigned long long)cfg.snr_db.n_elem,
                    (unsigned long long)cfg.tau_sq_values.n_elem, schemes.c_str());
    }
    return 0;
}

static int command_validate(const std::string &path)
{
    const ExperimentConfig cfg = load_config_file(path);
    std::printf("configuration '%s' is valid\n", cfg.name.c_str());
    return 0;
}

struct RunOverrides
{
    unsigned long long trials = 0;
    bool has_trials = false;
    unsigned long long seed = 0;
    bool has_seed = false;
    std::string out_dir;
    std::string schemes;
    std::string snr;
};

static int command_run(const std::string &target, const RunOverrides &ov)
{
    ExperimentConfig cfg = resolve_target(target);
    if (ov.has_trials)
        cfg.trials = (arma::uword)ov.trials;
    if (ov.has_seed)
        cfg.seed = ov.seed;
    if (!ov.out_dir.empty())
        cfg.output_dir = ov.out_dir;
    if (!ov.schemes.empty())
        cfg.schemes = parse_scheme_list(ov.schemes);
    if (!ov.snr.empty())
        cfg.snr_db = parse_snr_range(ov.snr);
    cfg.workers = workers_from_environment(cfg.workers);
    validate_config(cfg);

    const std::string workers = cfg.workers == 0 ? "auto" : std::to_string(cfg.workers);
    std::printf("running '%s': %llu trials per point, seed %llu, %s workers\n",
                cfg.name.c_str(), (unsigned long long)cfg.trials,
                (unsigned long long)cfg.seed, workers.c_str());
    const RunOutput out = run_experiment(cfg);
    for (const std::filesystem::path &p : out.csv_paths)
        std::printf("wrote %s\n", p.string().c_str());
    std::printf("sealed %s\n", out.manifest_path.string().c_str());
    return 0;
}

// ---------- ENTRY POINT ----------

int main(int argc, char **argv)
{
    // the engine parallelizes over trials; keep the algebra kernels single-threaded
    setenv("OPENBLAS_NUM_THREADS", "1", 0);
    setenv("OMP_NUM_THREADS", "1", 0);

    CLI::App app{"rate-splitting downlink simulator"};
    app.require_subcommand(1);

    std::string run_target;
    RunOverrides ov;
    CLI::App *run = app.add_subcommand("run", "run a preset or configuration file");
    run->add_option("target", run_target, "preset name or configuration path")->required();
    CLI::Option *trials_opt = run->add_option("--trials", ov.trials, "trials per point");
    CLI::Option *seed_opt = run->add_option("--seed", ov.seed, "master seed");
    run->add_option("--out", ov.out_dir, "output directory");
    run->add_option("--schemes", ov.schemes, "comma-separated scheme list");
    run->add_option("--snr", ov.snr, "SNR grid as A:B:STEP in dB");

    CLI::App *list = app.add_subcommand("list-presets", "show the preset catalog");

    std::string validate_path;
    CLI::App *check = app.add_subcommand("validate", "check a configuration file");
    check->add_option("config", validate_path, "configuration path")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (run->parsed())
        {
            ov.has_trials = trials_opt->count() > 0;
            ov.has_seed = seed_opt->count() > 0;
            return command_run(run_target, ov);
        }
        if (list->parsed())
            return command_list_presets();
        if (check->parsed())
            return command_validate(validate_path);
    }
    catch (const std::exception &e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
