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

#include "gpimpute/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gpimpute/errors.hpp"

namespace gpimpute {

std::vector<double> segment_means(const SpeedPanel &panel) {
    std::vector<double> means;
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        double sum = 0.0;
        std::size_t n = 0;
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                sum += panel.speed(r, t);
                ++n;
            }
        }
        means.push_back(n > 0 ? sum / static_cast<double>(n) : 0.0);
    }
    return means;
}

RegressionFeatureRow feature_row(const SpeedPanel &panel, const Cell &cell, std::span<const std::size_t> neighbors,
                                 std::span<const double> means) {
    const auto r = static_cast<Eigen::Index>(cell.segment);
    const auto t = static_cast<Eigen::Index>(cell.bin);
    const double mean = means[cell.segment];
    RegressionFeatureRow row;
    row.features = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(2 * kTemporalContext + neighbors.size()), mean);
    std::size_t found = 0;
    Eigen::Index k = 0;
    for (Eigen::Index s = t - 1; s >= 0 && k < static_cast<Eigen::Index>(kTemporalContext); --s) {
        if (panel.observed(r, s)) {
            row.features(k++) = panel.speed(r, s);
        }
    }
    found += static_cast<std::size_t>(k);
    k = 0;
    for (Eigen::Index s = t + 1; s < panel.num_bins() && k < static_cast<Eigen::Index>(kTemporalContext); ++s) {
        if (panel.observed(r, s)) {
            row.features(static_cast<Eigen::Index>(kTemporalContext) + k++) = panel.speed(r, s);
        }
    }
    found += static_cast<std::size_t>(k);
    row.temporal_complete = found == 2 * kTemporalContext;
    row.neighbors_observed = true;
    for (std::size_t j = 0; j < neighbors.size(); ++j) {
        const auto n = static_cast<Eigen::Index>(neighbors[j]);
        const auto index = static_cast<Eigen::Index>(2 * kTemporalContext + j);
        if (panel.observed(n, t)) {
            row.features(index) = panel.speed(n, t);
        } else {
            row.features(index) = means[neighbors[j]];
            row.neighbors_observed = false;
        }
    }
    row.target = panel.observed(r, t) ? panel.speed(r, t) : std::numeric_limits<double>::quiet_NaN();
    return row;
}

namespace {

void check_targets(const SpeedPanel &panel, std::span<const Cell> targets) {
    for (const auto &c : targets) {
        if (c.segment >= static_cast<std::size_t>(panel.num_segments()) || c.bin < 0 || c.bin >= panel.num_bins()) {
            throw DomainError("target cell outside the panel");
        }
    }
}

void check_neighbors(const SpeedPanel &panel, std::span<const std::size_t> neighbors) {
    for (const auto n : neighbors) {
        if (n >= static_cast<std::size_t>(panel.num_segments())) {
            throw DomainError("neighbor segment outside the panel");
        }
    }
}

std::map<std::size_t, std::vector<std::size_t>> group_by_segment(std::span<const Cell> targets) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        groups[targets[i].segment].push_back(i);
    }
    return groups;
}

std::vector<std::size_t> without_segment(std::span<const std::size_t> neighbors, std::size_t segment) {
    std::vector<std::size_t> out;
    for (const auto n : neighbors) {
        if (n != segment) {
            out.push_back(n);
        }
    }
    return out;
}

} // namespace

std::vector<Imputation> naive_impute(const SpeedPanel &panel, std::span<const Cell> targets) {
    check_targets(panel, targets);
    const auto means = segment_means(panel);
    std::vector<Imputation> out;
    out.reserve(targets.size());
    for (const auto &c : targets) {
        const auto r = static_cast<Eigen::Index>(c.segment);
        Imputation imp{c, means[c.segment], true};
        for (Eigen::Index s = static_cast<Eigen::Index>(c.bin) - 1; s >= 0; --s) {
            if (panel.observed(r, s)) {
                imp.value = panel.speed(r, s);
                imp.fallback = false;
                break;
            }
        }
        out.push_back(imp);
    }
    return out;
}

std::vector<Imputation> linreg_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                      std::span<const std::size_t> neighbors) {
    check_targets(panel, targets);
    check_neighbors(panel, neighbors);
    const auto means = segment_means(panel);
    std::vector<Imputation> out(targets.size());

    for (const auto &[segment, members] : group_by_segment(targets)) {
        const auto others = without_segment(neighbors, segment);
        std::vector<RegressionFeatureRow> rows;
        for (TimeBin t = 0; t < panel.num_bins(); ++t) {
            if (!panel.is_observed(segment, t)) {
                continue;
            }
            auto row = feature_row(panel, {segment, t}, others, means);
            if (row.temporal_complete) {
                rows.push_back(std::move(row));
            }
        }
        if (rows.size() < 20) {
            throw InsufficientDataError("linear regression needs >= 20 complete training rows, found " +
                                        std::to_string(rows.size()));
        }
        const auto p = static_cast<Eigen::Index>(2 * kTemporalContext + others.size());
        Eigen::MatrixXd design(static_cast<Eigen::Index>(rows.size()), p + 1);
        Eigen::VectorXd response(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
            design(static_cast<Eigen::Index>(i), 0) = 1.0;
            design.row(static_cast<Eigen::Index>(i)).tail(p) = rows[i].features.transpose();
            response(static_cast<Eigen::Index>(i)) = rows[i].target;
        }
        // Minimum-norm least squares; identical to OLS at full rank.
        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
        const Eigen::VectorXd beta = cod.solve(response);

        for (const auto i : members) {
            const auto row = feature_row(panel, targets[i], others, means);
            out[i] = {targets[i], beta(0) + row.features.dot(beta.tail(p)), false};
        }
    }
    return out;
}

std::vector<Imputation> knn_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                   std::span<const std::size_t> neighbors, std::size_t k) {
    check_targets(panel, targets);
    check_neighbors(panel, neighbors);
    if (k < 1) {
        throw DomainError("kNN needs k >= 1");
    }
    constexpr double kEpsilon = 1e-9;
    const auto means = segment_means(panel);
    std::vector<Imputation> out(targets.size());

    for (const auto &[segment, members] : group_by_segment(targets)) {
        const auto others = without_segment(neighbors, segment);
        std::vector<RegressionFeatureRow> pool;
        for (TimeBin t = 0; t < panel.num_bins(); ++t) {
            if (!panel.is_observed(segment, t)) {
                continue;
            }
            auto row = feature_row(panel, {segment, t}, others, means);
            if (row.temporal_complete && row.neighbors_observed) {
                pool.push_back(std::move(row));
            }
        }
        if (pool.empty()) {
            throw InsufficientDataError("kNN candidate pool is empty");
        }
        const std::size_t take = std::min(k, pool.size());
        std::vector<std::pair<double, std::size_t>> distance(pool.size());
        for (const auto i : members) {
            const auto query = feature_row(panel, targets[i], others, means);
            for (std::size_t c = 0; c < pool.size(); ++c) {
                distance[c] = {(pool[c].features - query.features).norm(), c};
            }
            std::partial_sort(distance.begin(), distance.begin() + static_cast<std::ptrdiff_t>(take), distance.end());
            double weighted = 0.0;
            double total = 0.0;
            // Weights relative to the nearest row: w_j / w_0, so a single neighbor returns its target exactly.
            const double nearest = distance[0].first + kEpsilon;
            for (std::size_t j = 0; j < take; ++j) {
                const double w = nearest / (distance[j].first + kEpsilon);
                weighted += w * pool[distance[j].second].target;
                total += w;
            }
            out[i] = {targets[i], weighted / total, false};
        }
    }
    return out;
}

} // namespace gpimpute
