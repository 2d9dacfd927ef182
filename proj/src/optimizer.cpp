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

#include "gpimpute/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "gpimpute/errors.hpp"
#include "gpimpute/random.hpp"

namespace gpimpute {

namespace {

constexpr double kArmijo = 1e-4;
constexpr double kMaxStep = 3.0; // infinity-norm cap on a single log-space move
constexpr int kMaxBacktracks = 40;

struct Evaluation {
    double value;
    Eigen::VectorXd grad;
};

std::optional<Evaluation> evaluate(const Objective &objective, const Eigen::VectorXd &x,
                                   const std::vector<bool> &fixed) {
    Evaluation e{0.0, Eigen::VectorXd::Zero(x.size())};
    try {
        e.value = objective(x, &e.grad);
    } catch (const ConditioningError &) {
        return std::nullopt;
    } catch (const DomainError &) {
        return std::nullopt;
    }
    if (!std::isfinite(e.value) || !e.grad.allFinite()) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < fixed.size(); ++i) {
        if (fixed[i]) {
            e.grad(static_cast<Eigen::Index>(i)) = 0.0;
        }
    }
    return e;
}

} // namespace

AscentResult maximize_bfgs(const Objective &objective, const Eigen::VectorXd &start, const OptimizerConfig &config,
                           const std::vector<bool> &fixed) {
    const Eigen::Index n = start.size();
    auto current = evaluate(objective, start, fixed);
    if (!current) {
        throw ConditioningError("objective cannot be evaluated at the start point");
    }
    AscentResult result{start, current->value, 0, false};
    if (n == 0) {
        result.converged = true;
        return result;
    }

    Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd x = start;
    for (int iter = 0; iter < config.max_iters; ++iter) {
        if (current->grad.lpNorm<Eigen::Infinity>() < config.tolerance) {
            result.converged = true;
            break;
        }
        // Ascent direction on f; equivalently descent on -f with H approximating the inverse Hessian of -f.
        Eigen::VectorXd direction = inv_hessian * current->grad;
        double slope = current->grad.dot(direction);
        if (!(slope > 0.0)) {
            inv_hessian.setIdentity();
            direction = current->grad;
            slope = current->grad.squaredNorm();
        }
        const double longest = direction.lpNorm<Eigen::Infinity>();
        double step = longest > kMaxStep ? kMaxStep / longest : 1.0;

        std::optional<Evaluation> next;
        Eigen::VectorXd candidate;
        for (int bt = 0; bt < kMaxBacktracks; ++bt) {
            candidate = x + step * direction;
            next = evaluate(objective, candidate, fixed);
            if (next && next->value >= current->value + kArmijo * step * slope) {
                break;
            }
            next.reset();
            step *= 0.5;
        }
        result.iterations = iter + 1;
        if (!next) {
            // No acceptable step: either converged to rounding or a bad quasi-Newton model.
            if (inv_hessian.isIdentity()) {
                break;
            }
            inv_hessian.setIdentity();
            continue;
        }

        const Eigen::VectorXd s = candidate - x;
        // Curvature pair for the minimization of -f.
        const Eigen::VectorXd y = current->grad - next->grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (iter == 0) {
                inv_hessian *= sy / y.squaredNorm();
            }
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
            inv_hessian = left * inv_hessian * left.transpose() + rho * s * s.transpose();
        }
        const double improvement = next->value - current->value;
        x = candidate;
        current = std::move(next);
        result.x = x;
        result.value = current->value;
        if (improvement <= config.value_tolerance * (1.0 + std::abs(current->value))) {
            result.converged = current->grad.lpNorm<Eigen::Infinity>() < config.tolerance;
            break;
        }
    }
    if (current->grad.lpNorm<Eigen::Infinity>() < config.tolerance) {
        result.converged = true;
    }
    return result;
}

AscentResult maximize_with_restarts(const Objective &objective, const Eigen::VectorXd &start,
                                    const OptimizerConfig &config, const std::vector<bool> &fixed) {
    if (config.max_iters <= 0) {
        auto e = evaluate(objective, start, fixed);
        return {start, e ? e->value : -std::numeric_limits<double>::infinity(), 0, false};
    }
    if (auto e = evaluate(objective, start, fixed); e && e->grad.lpNorm<Eigen::Infinity>() < config.tolerance) {
        return {start, e->value, 0, true};
    }

    Rng rng(mix_seed(config.seed, 0x5eed));
    std::optional<AscentResult> best;
    const int restarts = std::max(1, config.restarts);
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd init = start;
        if (r > 0) {
            for (Eigen::Index i = 0; i < init.size(); ++i) {
                const double jitter = uniform(rng, -config.restart_jitter, config.restart_jitter);
                const bool frozen = static_cast<std::size_t>(i) < fixed.size() && fixed[static_cast<std::size_t>(i)];
                if (!frozen) {
                    init(i) += jitter;
                }
            }
        }
        try {
            auto run = maximize_bfgs(objective, init, config, fixed);
            if (!best || run.value > best->value) {
                best = std::move(run);
            }
        } catch (const ConditioningError &) {
            continue;
        }
    }
    if (!best) {
        throw ConditioningError("every optimizer restart failed to factorize the covariance");
    }
    return *best;
}

} // namespace gpimpute
