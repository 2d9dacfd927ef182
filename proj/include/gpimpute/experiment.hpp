/*
 * Copyright 2026 The gpimpute Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef GPIMPUTE_EXPERIMENT_HPP
#define GPIMPUTE_EXPERIMENT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gpimpute/imputation.hpp"
#include "gpimpute/metrics.hpp"
#include "gpimpute/missingness.hpp"
#include "gpimpute/panel.hpp"

namespace gpimpute {

struct MissingSpec {
    MaskKind kind = MaskKind::MCAR;
    double ratio = 0.5;
    double p_mo = 0.0;
    double p_mm = 0.0;

    // "MCAR-0.5" or "FSM-0.25-0.75".
    std::string label() const;
    MissingMask generate(std::size_t rows, std::size_t cols, std::uint64_t seed) const;
};

// Neighbor configuration such as "B", "A" or "B+A".
struct Variant {
    std::string label;
    std::vector<std::string> neighbors;
};

inline const std::vector<std::string> &known_methods() {
    static const std::vector<std::string> methods{"naive", "linreg", "knn", "indep_gp", "multi_gp"};
    return methods;
}

struct ExperimentConfig {
    std::optional<std::string> csv_path;
    std::optional<SynthConfig> synth;
    std::string target;
    std::vector<Variant> variants;
    std::vector<std::string> methods;
    std::vector<MissingSpec> missing;
    std::vector<std::uint64_t> seeds;
    std::string output;
    GPImputeConfig gp;
    std::size_t knn_k = 10;
    // Wall time is the only non-deterministic column; it stays empty unless enabled.
    bool record_timing = false;

    // Throws ConfigError.
    void validate() const;
};

// JSON document; see README for the schema. Throws ConfigError.
ExperimentConfig parse_experiment_config(std::string_view json_text);
ExperimentConfig load_experiment_config(const std::string &path);

struct ResultRow {
    std::string method;
    std::string variant;
    std::string missing;
    std::uint64_t seed = 0;
    std::optional<MetricsReport> metrics;
    // "ok", or "failed: <reason>".
    std::string status = "ok";
    double wall_time_ms = 0.0;
};

// The panel a sweep uses for `seed` (synthetic sources are regenerated per seed).
SpeedPanel sweep_panel(const ExperimentConfig &config, std::uint64_t seed);
std::uint64_t sweep_mask_seed(std::uint64_t seed);

// Imputes `targets` with a named method; throws DomainError for an unknown name.
std::vector<Imputation> impute_with(const std::string &method, const SpeedPanel &panel, std::span<const Cell> targets,
                                    std::span<const std::size_t> neighbors, const GPImputeConfig &gp,
                                    std::size_t knn_k, std::uint64_t seed);

/*
 * Every (missing spec x method x variant x seed) combination, in that nesting
 * order regardless of `jobs`.
 */
std::vector<ResultRow> run_sweep(const ExperimentConfig &config, std::size_t jobs = 1);

// method,variant,missing_spec,seed,mae,rmse,rae_pct,r2,n,wall_time_ms,status
void write_results_csv(std::ostream &out, const std::vector<ResultRow> &rows, bool with_timing);

// Mean MAE over seeds for one (method, variant, missing) cell; nullopt if every row failed.
std::optional<double> seed_averaged_mae(const std::vector<ResultRow> &rows, const std::string &method,
                                        const std::string &variant, const std::string &missing);

} // namespace gpimpute

#endif // GPIMPUTE_EXPERIMENT_HPP
