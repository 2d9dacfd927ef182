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

#ifndef GPIMPUTE_OPTIMIZER_HPP
#define GPIMPUTE_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace gpimpute {

struct OptimizerConfig {
    int max_iters = 200;
    int restarts = 3;
    // Convergence threshold on the infinity norm of the free gradient.
    double tolerance = 1e-6;
    // Stop when an accepted step improves the objective by less than value_tolerance * (1 + |f|).
    double value_tolerance = 1e-9;
    // Half-width of the uniform jitter applied to log-space parameters on restarts 2..n.
    double restart_jitter = 1.0;
    // Keep periodic-kernel periods at their initial value.
    bool fix_period = true;
    std::uint64_t seed = 0;
};

// Value to maximize; fills `grad` when non-null. May throw ConditioningError,
// which the optimizer treats as an infeasible point.
using Objective = std::function<double(const Eigen::VectorXd &x, Eigen::VectorXd *grad)>;

struct AscentResult {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/*
 * BFGS ascent with Armijo backtracking. Components with `fixed[i] == true`
 * never move. The objective is non-decreasing along the iterates, so the
 * result is never worse than the start.
 */
AscentResult maximize_bfgs(const Objective &objective, const Eigen::VectorXd &start, const OptimizerConfig &config,
                           const std::vector<bool> &fixed = {});

/*
 * Runs maximize_bfgs from `start` and from `config.restarts - 1` jittered
 * copies of it; returns the best. If the gradient at `start` is already below
 * tolerance, `start` is returned unchanged. Throws ConditioningError when no
 * start point can be evaluated.
 */
AscentResult maximize_with_restarts(const Objective &objective, const Eigen::VectorXd &start,
                                    const OptimizerConfig &config, const std::vector<bool> &fixed = {});

} // namespace gpimpute

#endif // GPIMPUTE_OPTIMIZER_HPP
