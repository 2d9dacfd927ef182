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

#include "gpimpute/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gpimpute/errors.hpp"
#include "gpimpute/gp.hpp"
#include "gpimpute/mogp.hpp"
#include "gpimpute/random.hpp"

namespace gpimpute {

namespace {

struct Standardization {
    double mean = 0.0;
    double std = 1.0;
};

// Population mean/std over observed cells; degenerate segments keep std = 1.
Standardization standardization(const SpeedPanel &panel, std::size_t segment) {
    const auto cells = panel.observed_cells(segment, 0, panel.num_bins());
    Standardization s;
    if (cells.empty()) {
        return s;
    }
    double sum = 0.0;
    for (const auto &c : cells) {
        sum += c.value;
    }
    s.mean = sum / static_cast<double>(cells.size());
    double ss = 0.0;
    for (const auto &c : cells) {
        ss += (c.value - s.mean) * (c.value - s.mean);
    }
    const double std = std::sqrt(ss / static_cast<double>(cells.size()));
    if (std > 0.0) {
        s.std = std;
    }
    return s;
}

ObservationSeries standardized_series(const SpeedPanel &panel, std::size_t segment, TimeBin begin, TimeBin end,
                                      const Standardization &s) {
    auto series = panel.series(segment, begin, end);
    series.values = (series.values.array() - s.mean) / s.std;
    series.offset = s.mean;
    series.scale = s.std;
    return series;
}

double sample_std(const Eigen::VectorXd &values) {
    if (values.size() < 2) {
        return 1.0;
    }
    const double mean = values.mean();
    const double std = std::sqrt((values.array() - mean).square().mean());
    return std > 0.0 ? std : 1.0;
}

KernelSpec fitted_single_output(const ObservationSeries &series, const GPImputeConfig &config,
                                std::uint64_t stream) {
    if (!config.optimize || series.size() < 2) {
        return config.init;
    }
    OptimizerConfig optimizer = config.optimizer;
    optimizer.seed = mix_seed(config.optimizer.seed, stream);
    try {
        return optimize_hyperparams(series, config.init, optimizer);
    } catch (const ConditioningError &) {
        return config.init;
    }
}

std::map<std::size_t, std::vector<std::size_t>> targets_by_segment(const SpeedPanel &panel,
                                                                   std::span<const Cell> targets) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto &c = targets[i];
        if (c.segment >= static_cast<std::size_t>(panel.num_segments()) || c.bin < 0 || c.bin >= panel.num_bins()) {
            throw DomainError("target cell outside the panel");
        }
        groups[c.segment].push_back(i);
    }
    return groups;
}

std::size_t window_of(TimeBin bin, std::size_t window) {
    return static_cast<std::size_t>(bin) / window;
}

} // namespace

std::vector<std::pair<TimeBin, TimeBin>> imputation_windows(TimeBin bins, std::size_t window) {
    if (window == 0) {
        throw DomainError("imputation window must be positive");
    }
    std::vector<std::pair<TimeBin, TimeBin>> out;
    const auto w = static_cast<TimeBin>(window);
    for (TimeBin start = 0; start < bins; start += w) {
        out.emplace_back(start, std::min(bins, start + w));
    }
    return out;
}

std::vector<Imputation> indep_gp_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                        const GPImputeConfig &config) {
    const auto windows = imputation_windows(panel.num_bins(), config.window);
    std::vector<Imputation> out(targets.size());
    for (const auto &[segment, members] : targets_by_segment(panel, targets)) {
        const auto norm = standardization(panel, segment);
        std::map<std::size_t, std::vector<std::size_t>> by_window;
        for (const auto i : members) {
            by_window[window_of(targets[i].bin, config.window)].push_back(i);
        }
        for (const auto &[w, idx] : by_window) {
            const auto [begin, end] = windows[w];
            const auto fallback = [&] {
                for (const auto i : idx) {
                    out[i] = {targets[i], norm.mean, true};
                }
            };
            auto series = standardized_series(panel, segment, begin, end, norm);
            if (series.size() == 0) {
                fallback();
                continue;
            }
            const auto spec = fitted_single_output(series, config, segment * 100003 + w);
            try {
                const GPModel model(std::move(series), spec);
                std::vector<TimeBin> bins;
                for (const auto i : idx) {
                    bins.push_back(targets[i].bin);
                }
                const auto posterior = model.predict(bins);
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    out[idx[j]] = {targets[idx[j]], norm.mean + norm.std * posterior[j].mean, false};
                }
            } catch (const ConditioningError &) {
                fallback();
            }
        }
    }
    return out;
}

std::vector<Imputation> multi_gp_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                        std::span<const std::size_t> neighbors, const GPImputeConfig &config) {
    for (const auto n : neighbors) {
        if (n >= static_cast<std::size_t>(panel.num_segments())) {
            throw DomainError("neighbor segment outside the panel");
        }
    }
    const auto windows = imputation_windows(panel.num_bins(), config.window);
    std::vector<Imputation> out(targets.size());
    for (const auto &[segment, members] : targets_by_segment(panel, targets)) {
        // Local output 0 is the target segment.
        std::vector<std::size_t> outputs{segment};
        for (const auto n : neighbors) {
            if (std::find(outputs.begin(), outputs.end(), n) == outputs.end()) {
                outputs.push_back(n);
            }
        }
        std::vector<Standardization> norms;
        std::vector<std::string> ids;
        for (const auto r : outputs) {
            norms.push_back(standardization(panel, r));
            ids.push_back(panel.segment_ids[r]);
        }
        std::map<std::size_t, std::vector<std::size_t>> by_window;
        for (const auto i : members) {
            by_window[window_of(targets[i].bin, config.window)].push_back(i);
        }
        for (const auto &[w, idx] : by_window) {
            const auto [begin, end] = windows[w];
            const auto fallback = [&] {
                for (const auto i : idx) {
                    out[i] = {targets[i], norms[0].mean, true};
                }
            };
            std::vector<CellValue> observations;
            std::vector<KernelSpec> single;
            std::vector<double> stds;
            for (std::size_t local = 0; local < outputs.size(); ++local) {
                const auto series = standardized_series(panel, outputs[local], begin, end, norms[local]);
                for (std::size_t k = 0; k < series.size(); ++k) {
                    observations.push_back({{local, series.times[k]}, series.values(static_cast<Eigen::Index>(k))});
                }
                single.push_back(fitted_single_output(series, config, (segment * 131 + outputs[local]) * 100003 + w));
                stds.push_back(sample_std(series.values));
            }
            if (observations.empty()) {
                fallback();
                continue;
            }
            auto spec = initial_mogp_spec(ids, single, stds, config.initial_length);
            if (config.optimize && observations.size() >= 2) {
                OptimizerConfig optimizer = config.optimizer;
                optimizer.restarts = config.mogp_restarts;
                optimizer.seed = mix_seed(config.optimizer.seed, 0x6d6f6770ULL + segment * 100003 + w);
                try {
                    spec = mogp_optimize(observations, spec, optimizer);
                } catch (const ConditioningError &) {
                }
            }
            try {
                const MOGPModel model(spec, std::move(observations));
                std::vector<Cell> cells;
                for (const auto i : idx) {
                    cells.push_back({0, targets[i].bin});
                }
                const auto posterior = model.predict(cells);
                for (std::size_t j = 0; j < idx.size(); ++j) {
                    const double value = norms[0].mean + norms[0].std * posterior.mean(static_cast<Eigen::Index>(j));
                    out[idx[j]] = {targets[idx[j]], value, false};
                }
            } catch (const ConditioningError &) {
                fallback();
            }
        }
    }
    return out;
}

} // namespace gpimpute
