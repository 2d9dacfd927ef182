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

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gpimpute/errors.hpp"
#include "gpimpute/experiment.hpp"
#include "gpimpute/metrics.hpp"
#include "gpimpute/missingness.hpp"
#include "gpimpute/panel.hpp"

using namespace gpimpute;

namespace {

constexpr int kConfigExit = 2;
constexpr int kDataExit = 3;

template <typename Fn>
void with_output(const std::string &path, Fn &&fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ValidationError("cannot open output '" + path + "'");
    }
    fn(out);
}

std::vector<std::size_t> resolve(const SpeedPanel &panel, const std::vector<std::string> &ids) {
    std::vector<std::size_t> out;
    for (const auto &id : ids) {
        out.push_back(panel.segment_index(id));
    }
    return out;
}

// Imputed cells are written in the panel CSV schema, restricted to the imputed cells.
SpeedPanel imputed_panel(const SpeedPanel &like, const std::vector<Imputation> &imputed) {
    auto out = SpeedPanel::empty_like(like.segment_ids, like.first_bin, like.num_bins());
    for (const auto &im : imputed) {
        out.speed(static_cast<Eigen::Index>(im.cell.segment), im.cell.bin) = im.value;
        out.observed(static_cast<Eigen::Index>(im.cell.segment), im.cell.bin) = true;
    }
    return out;
}

MissingSpec missing_from(double ratio, const std::vector<double> &fsm) {
    MissingSpec spec;
    if (!fsm.empty()) {
        if (fsm.size() != 2) {
            throw ConfigError("--fsm takes p_mo,p_mm");
        }
        spec.kind = MaskKind::FSM;
        spec.p_mo = fsm[0];
        spec.p_mm = fsm[1];
    } else {
        spec.kind = MaskKind::MCAR;
        spec.ratio = ratio;
    }
    return spec;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Gaussian-process imputation of traffic-speed panels"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::uint64_t seed = 1;
    std::size_t jobs = 1;

    auto *synth = app.add_subcommand("synth", "Generate a synthetic panel from a sweep config");
    synth->add_option("--config", config_path, "Experiment config (JSON)")->required();
    synth->add_option("--seed", seed, "Sweep seed");
    synth->add_option("--out", out_path, "Panel CSV");

    std::string panel_path;
    double ratio = 0.5;
    std::vector<double> fsm;
    auto *mask = app.add_subcommand("mask", "Simulate missingness on a panel");
    mask->add_option("--panel", panel_path, "Panel CSV")->required();
    mask->add_option("--ratio", ratio, "MCAR ratio");
    mask->add_option("--fsm", fsm, "FSM probabilities p_mo,p_mm")->delimiter(',')->expected(2);
    mask->add_option("--seed", seed, "Mask seed");
    mask->add_option("--out", out_path, "Mask file");

    std::string mask_path;
    std::string method;
    std::string target;
    std::vector<std::string> neighbors;
    auto *impute = app.add_subcommand("impute", "Impute the masked cells of one segment");
    impute->add_option("--panel", panel_path, "Panel CSV")->required();
    impute->add_option("--mask", mask_path, "Mask file")->required();
    impute->add_option("--method", method, "Imputation method")->required();
    impute->add_option("--target", target, "Target segment")->required();
    impute->add_option("--neighbors", neighbors, "Neighbor segments")->delimiter(',');
    impute->add_option("--config", config_path, "Experiment config supplying GP and kNN settings");
    impute->add_option("--seed", seed, "Optimizer seed");
    impute->add_option("--out", out_path, "Imputed cells as panel CSV");

    std::string imputed_path;
    auto *evaluate_cmd = app.add_subcommand("evaluate", "Score imputed cells against the unmasked panel");
    evaluate_cmd->add_option("--panel", panel_path, "Ground-truth panel CSV")->required();
    evaluate_cmd->add_option("--imputed", imputed_path, "Imputed cells CSV")->required();
    evaluate_cmd->add_option("--out", out_path, "Metrics CSV");

    auto *sweep = app.add_subcommand("sweep", "Run the full mask/impute/evaluate protocol");
    sweep->add_option("--config", config_path, "Experiment config (JSON)")->required();
    sweep->add_option("--out", out_path, "Results CSV (overrides config output)");
    sweep->add_option("--jobs", jobs, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigExit;
    }

    try {
        if (*synth) {
            const auto config = load_experiment_config(config_path);
            if (!config.synth) {
                throw ConfigError("config has no synth source");
            }
            const auto panel = sweep_panel(config, seed);
            with_output(out_path, [&](std::ostream &out) { write_csv(out, panel); });
        } else if (*mask) {
            const auto panel = load_csv(panel_path);
            const auto m = missing_from(ratio, fsm).generate(static_cast<std::size_t>(panel.num_segments()),
                                                             static_cast<std::size_t>(panel.num_bins()), seed);
            with_output(out_path, [&](std::ostream &out) { write_mask(out, m); });
        } else if (*impute) {
            GPImputeConfig gp;
            std::size_t knn_k = 10;
            if (!config_path.empty()) {
                const auto config = load_experiment_config(config_path);
                gp = config.gp;
                knn_k = config.knn_k;
            }
            const auto panel = load_csv(panel_path);
            const auto masked = apply_mask(panel, load_mask(mask_path));
            std::size_t t = 0;
            std::vector<std::size_t> nbrs;
            try {
                t = panel.segment_index(target);
                nbrs = resolve(panel, neighbors);
            } catch (const DomainError &e) {
                throw ConfigError(e.what());
            }
            std::vector<Cell> targets;
            for (const auto &h : masked.held_out) {
                if (h.cell.segment == t) {
                    targets.push_back(h.cell);
                }
            }
            const auto imputed = impute_with(method, masked.panel, targets, nbrs, gp, knn_k, seed);
            with_output(out_path, [&](std::ostream &out) { write_csv(out, imputed_panel(panel, imputed)); });
        } else if (*evaluate_cmd) {
            const auto truth_panel = load_csv(panel_path);
            const auto imputed = load_csv(imputed_path);
            std::vector<CellValue> predictions;
            std::vector<CellValue> truth;
            for (std::size_t s = 0; s < imputed.segment_ids.size(); ++s) {
                const auto r = truth_panel.segment_index(imputed.segment_ids[s]);
                for (Eigen::Index c = 0; c < imputed.num_bins(); ++c) {
                    if (!imputed.observed(static_cast<Eigen::Index>(s), c)) {
                        continue;
                    }
                    const TimeBin col = imputed.first_bin + c - truth_panel.first_bin;
                    if (col < 0 || col >= truth_panel.num_bins() ||
                        !truth_panel.observed(static_cast<Eigen::Index>(r), col)) {
                        throw ValidationError("imputed cell has no ground truth");
                    }
                    predictions.push_back({{r, col}, imputed.speed(static_cast<Eigen::Index>(s), c)});
                    truth.push_back({{r, col}, truth_panel.speed(static_cast<Eigen::Index>(r), col)});
                }
            }
            const auto report = gpimpute::evaluate(predictions, truth);
            with_output(out_path, [&](std::ostream &out) {
                out << MetricsReport::csv_header() << '\n' << report.csv_row("imputed", imputed_path) << '\n';
            });
        } else if (*sweep) {
            auto config = load_experiment_config(config_path);
            if (!out_path.empty()) {
                config.output = out_path;
            }
            const auto rows = run_sweep(config, jobs);
            with_output(config.output, [&](std::ostream &out) { write_results_csv(out, rows, config.record_timing); });
        }
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigExit;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataExit;
    }
    return 0;
}
