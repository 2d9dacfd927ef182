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

#ifndef GPIMPUTE_BASELINES_HPP
#define GPIMPUTE_BASELINES_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gpimpute/panel.hpp"

namespace gpimpute {

constexpr std::size_t kTemporalContext = 5;

/*
 * Features for one cell: the 5 nearest observed speeds before it and the 5
 * nearest after it in its own segment (nearest first, missing cells skipped),
 * then the concurrent speed of each neighbor segment. Gaps are filled with
 * the segment's mean observed speed.
 */
struct RegressionFeatureRow {
    Eigen::VectorXd features;
    double target = 0.0;
    // All 10 temporal features were found without filling.
    bool temporal_complete = false;
    // Every neighbor speed was observed.
    bool neighbors_observed = false;
};

RegressionFeatureRow feature_row(const SpeedPanel &panel, const Cell &cell, std::span<const std::size_t> neighbors,
                                 std::span<const double> segment_means);

// Mean observed speed per segment (0 for a segment with no observations).
std::vector<double> segment_means(const SpeedPanel &panel);

// Last earlier observed value in the same segment; segment mean (flagged) if none.
std::vector<Imputation> naive_impute(const SpeedPanel &panel, std::span<const Cell> targets);

// Least squares with intercept on temporally complete observed rows. Throws
// InsufficientDataError with fewer than 20 training rows.
std::vector<Imputation> linreg_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                      std::span<const std::size_t> neighbors);

// Inverse-distance weighted k nearest rows (w = 1 / (d + 1e-9)) among fully
// observed candidate rows. Throws InsufficientDataError for an empty pool.
std::vector<Imputation> knn_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                   std::span<const std::size_t> neighbors, std::size_t k = 10);

} // namespace gpimpute

#endif // GPIMPUTE_BASELINES_HPP
