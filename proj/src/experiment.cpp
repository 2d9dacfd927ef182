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

#include "gpimpute/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gpimpute/baselines.hpp"
#include "gpimpute/errors.hpp"
#include "gpimpute/random.hpp"
#include "text_util.hpp"

namespace gpimpute {

using nlohmann::json;

std::string MissingSpec::label() const {
    if (kind == MaskKind::MCAR) {
        return "MCAR-" + detail::format_number(ratio);
    }
    return "FSM-" + detail::format_number(p_mo) + "-" + detail::format_number(p_mm);
}

MissingMask MissingSpec::generate(std::size_t rows, std::size_t cols, std::uint64_t seed) const {
    if (kind == MaskKind::MCAR) {
        return mcar_mask(rows, cols, ratio, seed);
    }
    return fsm_mask(rows, cols, {p_mo, p_mm, seed});
}

void ExperimentConfig::validate() const {
    if (csv_path.has_value() == synth.has_value()) {
        throw ConfigError("exactly one data source (csv or synth) is required");
    }
    if (target.empty()) {
        throw ConfigError("target segment is required");
    }
    if (methods.empty()) {
        throw ConfigError("at least one method is required");
    }
    for (const auto &m : methods) {
        if (std::find(known_methods().begin(), known_methods().end(), m) == known_methods().end()) {
            throw ConfigError("unknown method '" + m + "'");
        }
    }
    if (missing.empty()) {
        throw ConfigError("at least one missing spec is required");
    }
    for (const auto &m : missing) {
        try {
            if (m.kind == MaskKind::MCAR) {
                if (!(m.ratio >= 0.0 && m.ratio <= 1.0)) {
                    throw DomainError("MCAR ratio must lie in [0, 1]");
                }
            } else {
                FSMConfig{m.p_mo, m.p_mm, 0}.validate();
            }
        } catch (const DomainError &e) {
            throw ConfigError(e.what());
        }
    }
    if (variants.empty()) {
        throw ConfigError("at least one variant is required");
    }
    if (seeds.empty()) {
        throw ConfigError("at least one seed is required");
    }
    if (gp.window == 0) {
        throw ConfigError("gp.window must be positive");
    }
    if (knn_k == 0) {
        throw ConfigError("knn_k must be positive");
    }
    if (synth) {
        try {
            synth->validate();
        } catch (const DomainError &e) {
            throw ConfigError(std::string("synth: ") + e.what());
        }
    }
}

namespace {

SynthConfig parse_synth(const json &j) {
    SynthConfig s;
    s.segments = j.value("segments", s.segments);
    s.bins = j.value("bins", s.bins);
    s.segment_ids = j.value("segment_ids", s.segment_ids);
    if (j.contains("mean_kmh")) {
        s.mean_kmh = j["mean_kmh"].is_array() ? j["mean_kmh"].get<std::vector<double>>()
                                              : std::vector<double>{j["mean_kmh"].get<double>()};
    }
    if (j.contains("std_kmh")) {
        s.std_kmh = j["std_kmh"].is_array() ? j["std_kmh"].get<std::vector<double>>()
                                            : std::vector<double>{j["std_kmh"].get<double>()};
    }
    s.coupling = j.value("coupling", s.coupling);
    s.coupling_lag = j.value("coupling_lag", s.coupling_lag);
    s.daily_amplitude = j.value("daily_amplitude", s.daily_amplitude);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.ar_coefficient = j.value("ar_coefficient", s.ar_coefficient);
    s.start_bin = j.value("start_bin", s.start_bin);
    s.seed = j.value("seed", s.seed);
    return s;
}

MissingSpec parse_missing(const json &j) {
    MissingSpec m;
    if (j.contains("mcar")) {
        m.kind = MaskKind::MCAR;
        m.ratio = j["mcar"].get<double>();
    } else if (j.contains("fsm")) {
        const auto p = j["fsm"].get<std::vector<double>>();
        if (p.size() != 2) {
            throw ConfigError("fsm missing spec needs [p_mo, p_mm]");
        }
        m.kind = MaskKind::FSM;
        m.p_mo = p[0];
        m.p_mm = p[1];
    } else {
        throw ConfigError("missing spec needs an 'mcar' or 'fsm' entry");
    }
    return m;
}

} // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
    ExperimentConfig config;
    try {
        const json j = json::parse(text);
        const auto &source = j.at("source");
        if (source.contains("csv")) {
            config.csv_path = source["csv"].get<std::string>();
        }
        if (source.contains("synth")) {
            config.synth = parse_synth(source["synth"]);
        }
        config.target = j.at("target").get<std::string>();
        for (const auto &v : j.at("variants")) {
            config.variants.push_back({v.at("label").get<std::string>(),
                                       v.value("neighbors", std::vector<std::string>{})});
        }
        config.methods = j.at("methods").get<std::vector<std::string>>();
        for (const auto &m : j.at("missing")) {
            config.missing.push_back(parse_missing(m));
        }
        const auto &seeds = j.at("seeds");
        if (seeds.is_array()) {
            config.seeds = seeds.get<std::vector<std::uint64_t>>();
        } else {
            const auto first = seeds.value("first", std::uint64_t{1});
            const auto count = seeds.at("count").get<std::uint64_t>();
            for (std::uint64_t i = 0; i < count; ++i) {
                config.seeds.push_back(first + i);
            }
        }
        config.output = j.value("output", std::string{});
        if (j.contains("gp")) {
            const auto &g = j["gp"];
            config.gp.window = g.value("window", config.gp.window);
            config.gp.optimize = g.value("optimize", config.gp.optimize);
            config.gp.initial_length = g.value("initial_length", config.gp.initial_length);
            config.gp.optimizer.max_iters = g.value("max_iters", config.gp.optimizer.max_iters);
            config.gp.optimizer.restarts = g.value("restarts", config.gp.optimizer.restarts);
            config.gp.mogp_restarts = g.value("mogp_restarts", config.gp.mogp_restarts);
            config.gp.optimizer.tolerance = g.value("tolerance", config.gp.optimizer.tolerance);
            config.gp.optimizer.value_tolerance = g.value("value_tolerance", config.gp.optimizer.value_tolerance);
            config.gp.optimizer.fix_period = g.value("fix_period", config.gp.optimizer.fix_period);
            if (g.contains("init")) {
                config.gp.init = KernelSpec::parse(g["init"].get<std::string>());
            }
        }
        config.knn_k = j.value("knn_k", config.knn_k);
        config.record_timing = j.value("record_timing", config.record_timing);
    } catch (const json::exception &e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const ParseError &e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    config.validate();
    return config;
}

ExperimentConfig load_experiment_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_experiment_config(text.str());
}

SpeedPanel sweep_panel(const ExperimentConfig &config, std::uint64_t seed) {
    if (config.csv_path) {
        return load_csv(*config.csv_path);
    }
    SynthConfig synth = *config.synth;
    synth.seed = mix_seed(config.synth->seed, seed);
    return synthesize_panel(synth);
}

std::uint64_t sweep_mask_seed(std::uint64_t seed) {
    return mix_seed(seed, 0x6d61736bULL);
}

std::vector<Imputation> impute_with(const std::string &method, const SpeedPanel &panel, std::span<const Cell> targets,
                                    std::span<const std::size_t> neighbors, const GPImputeConfig &gp,
                                    std::size_t knn_k, std::uint64_t seed) {
    if (method == "naive") {
        return naive_impute(panel, targets);
    }
    if (method == "linreg") {
        return linreg_impute(panel, targets, neighbors);
    }
    if (method == "knn") {
        return knn_impute(panel, targets, neighbors, knn_k);
    }
    GPImputeConfig seeded = gp;
    seeded.optimizer.seed = mix_seed(gp.optimizer.seed, seed);
    if (method == "indep_gp") {
        return indep_gp_impute(panel, targets, seeded);
    }
    if (method == "multi_gp") {
        return multi_gp_impute(panel, targets, neighbors, seeded);
    }
    throw DomainError("unknown method '" + method + "'");
}

namespace {

struct SweepCase {
    std::size_t missing;
    std::size_t method;
    std::size_t variant;
    std::size_t seed;
};

} // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig &config, std::size_t jobs) {
    config.validate();

    // Masked panels depend only on (seed, missing spec); they are shared by all methods and variants.
    std::vector<SpeedPanel> panels;
    for (const auto seed : config.seeds) {
        panels.push_back(sweep_panel(config, seed));
    }
    const auto &reference = panels.front();
    std::size_t target = 0;
    std::vector<std::vector<std::size_t>> neighbor_sets;
    try {
        target = reference.segment_index(config.target);
        for (const auto &v : config.variants) {
            std::vector<std::size_t> ids;
            for (const auto &n : v.neighbors) {
                ids.push_back(reference.segment_index(n));
            }
            neighbor_sets.push_back(std::move(ids));
        }
    } catch (const DomainError &e) {
        throw ConfigError(e.what());
    }

    std::vector<std::vector<MaskedPanel>> masked(config.seeds.size());
    for (std::size_t s = 0; s < config.seeds.size(); ++s) {
        const auto &panel = panels[s];
        for (const auto &m : config.missing) {
            const auto mask = m.generate(static_cast<std::size_t>(panel.num_segments()),
                                         static_cast<std::size_t>(panel.num_bins()), sweep_mask_seed(config.seeds[s]));
            masked[s].push_back(apply_mask(panel, mask));
        }
    }

    std::vector<SweepCase> cases;
    for (std::size_t mi = 0; mi < config.missing.size(); ++mi) {
        for (std::size_t me = 0; me < config.methods.size(); ++me) {
            for (std::size_t va = 0; va < config.variants.size(); ++va) {
                for (std::size_t se = 0; se < config.seeds.size(); ++se) {
                    cases.push_back({mi, me, va, se});
                }
            }
        }
    }

    std::vector<ResultRow> rows(cases.size());
    const auto run_case = [&](std::size_t index) {
        const auto &c = cases[index];
        ResultRow &row = rows[index];
        row.method = config.methods[c.method];
        row.variant = config.variants[c.variant].label;
        row.missing = config.missing[c.missing].label();
        row.seed = config.seeds[c.seed];
        const auto &mp = masked[c.seed][c.missing];
        std::vector<Cell> targets;
        std::vector<CellValue> truth;
        for (const auto &h : mp.held_out) {
            if (h.cell.segment == target) {
                targets.push_back(h.cell);
                truth.push_back(h);
            }
        }
        const auto start = std::chrono::steady_clock::now();
        try {
            if (targets.empty()) {
                throw InsufficientDataError("no held-out cells on the target segment");
            }
            const auto imputed =
                impute_with(row.method, mp.panel, targets, neighbor_sets[c.variant], config.gp, config.knn_k, row.seed);
            row.metrics = evaluate(imputed, truth);
        } catch (const std::exception &e) {
            row.metrics.reset();
            row.status = std::string("failed: ") + e.what();
        }
        row.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    };

    const std::size_t workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(1, cases.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < cases.size(); ++i) {
            run_case(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < cases.size(); i = next++) {
                    run_case(i);
                }
            });
        }
        for (auto &t : pool) {
            t.join();
        }
    }
    return rows;
}

void write_results_csv(std::ostream &out, const std::vector<ResultRow> &rows, bool with_timing) {
    out << "method,variant,missing_spec,seed,mae,rmse,rae_pct,r2,n,wall_time_ms,status\n";
    for (const auto &row : rows) {
        out << row.method << ',' << row.variant << ',' << row.missing << ',' << row.seed << ',';
        if (row.metrics) {
            const auto &m = *row.metrics;
            out << detail::format_number(m.mae) << ',' << detail::format_number(m.rmse) << ','
                << (m.rae ? detail::format_number(*m.rae * 100.0) : "nan") << ','
                << (m.r2 ? detail::format_number(*m.r2) : "nan") << ',' << m.n << ',';
        } else {
            out << ",,,,0,";
        }
        if (with_timing) {
            out << detail::format_number(row.wall_time_ms);
        }
        // Status messages may contain commas.
        std::string status = row.status;
        std::replace(status.begin(), status.end(), ',', ';');
        out << ',' << status << '\n';
    }
}

std::optional<double> seed_averaged_mae(const std::vector<ResultRow> &rows, const std::string &method,
                                        const std::string &variant, const std::string &missing) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto &row : rows) {
        if (row.method == method && row.variant == variant && row.missing == missing && row.metrics) {
            sum += row.metrics->mae;
            ++n;
        }
    }
    if (n == 0) {
        return std::nullopt;
    }
    return sum / static_cast<double>(n);
}

} // namespace gpimpute
