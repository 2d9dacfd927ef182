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

#ifndef GPIMPUTE_IMPUTATION_HPP
#define GPIMPUTE_IMPUTATION_HPP

#include <span>
#include <vector>

#include "gpimpute/kernels.hpp"
#include "gpimpute/optimizer.hpp"
#include "gpimpute/panel.hpp"

namespace gpimpute {

/*
 * Windowed GP imputation. The panel is cut into consecutive windows of
 * `window` bins (the last one may be shorter); each target is predicted from
 * the model fitted to the window that contains it. Speeds are standardized
 * per segment before fitting and mapped back afterwards.
 */
struct GPImputeConfig {
    std::size_t window = kBinsPerDay;
    KernelSpec init = default_temporal_spec();
    OptimizerConfig optimizer{};
    // Joint fits start from the single-output fits, so fewer restarts are needed.
    int mogp_restarts = 1;
    bool optimize = true;
    double initial_length = 12.0;
};

// Windows are [start, end) column ranges.
std::vector<std::pair<TimeBin, TimeBin>> imputation_windows(TimeBin bins, std::size_t window);

// Single-output GP on each target's own segment. Windows without observations
// fall back to the segment mean (flagged).
std::vector<Imputation> indep_gp_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                        const GPImputeConfig &config = {});

// Convolution-process multi-output GP over the target segment(s) plus `neighbors`.
std::vector<Imputation> multi_gp_impute(const SpeedPanel &panel, std::span<const Cell> targets,
                                        std::span<const std::size_t> neighbors, const GPImputeConfig &config = {});

} // namespace gpimpute

#endif // GPIMPUTE_IMPUTATION_HPP
