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

#include "gpimpute/gp.hpp"

#include <cmath>

#include "gpimpute/errors.hpp"

namespace gpimpute {

namespace {

Eigen::MatrixXd checked_covariance(const ObservationSeries &series, const KernelSpec &spec) {
    series.validate();
    if (series.size() == 0) {
        throw DomainError("cannot fit a GP to an empty series");
    }
    if (spec.empty()) {
        throw DomainError("cannot fit a GP with an empty kernel spec");
    }
    return gram(spec, series.times);
}

} // namespace

void ObservationSeries::validate() const {
    if (static_cast<Eigen::Index>(times.size()) != values.size()) {
        throw DomainError("series has " + std::to_string(times.size()) + " times but " +
                          std::to_string(values.size()) + " values");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (times[i] <= times[i - 1]) {
            throw DomainError("series time bins must be strictly increasing (bin " + std::to_string(times[i]) +
                              " follows " + std::to_string(times[i - 1]) + ")");
        }
    }
    if (!values.allFinite()) {
        throw DomainError("series values must be finite");
    }
}

GPModel::GPModel(ObservationSeries series, KernelSpec spec)
    : series_(std::move(series)), spec_(std::move(spec)), latent_spec_(spec_.without_white_noise()),
      covariance_(checked_covariance(series_, spec_)), factor_(covariance_), alpha_(factor_.solve(series_.values)) {}

double GPModel::log_marginal_likelihood() const {
    return gaussian_log_density(factor_, series_.values, alpha_);
}

Eigen::VectorXd GPModel::log_marginal_likelihood_gradient() const {
    // dL/dtheta = 1/2 tr((alpha alpha^T - V^{-1}) dV/dtheta)
    const Eigen::MatrixXd weight = alpha_ * alpha_.transpose() - factor_.inverse();
    const auto grads = gram_gradients(spec_, series_.times);
    Eigen::VectorXd out(static_cast<Eigen::Index>(grads.size()));
    for (std::size_t i = 0; i < grads.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = 0.5 * weight.cwiseProduct(grads[i]).sum();
    }
    return out;
}

PosteriorPoint GPModel::predict(TimeBin target) const {
    const TimeBin targets[] = {target};
    return predict(std::span<const TimeBin>(targets)).front();
}

std::vector<PosteriorPoint> GPModel::predict(std::span<const TimeBin> targets) const {
    const double noise = spec_.noise_variance();
    std::vector<PosteriorPoint> out(targets.size());
    if (targets.empty()) {
        return out;
    }
    const auto m = static_cast<Eigen::Index>(targets.size());
    Eigen::MatrixXd k_star = Eigen::MatrixXd::Zero(series_.values.size(), m);
    if (!latent_spec_.empty()) {
        k_star = cross_gram(latent_spec_, series_.times, targets);
    }
    const Eigen::VectorXd mean = k_star.transpose() * alpha_;
    const Eigen::MatrixXd v = factor_.solve_lower(k_star);
    for (Eigen::Index j = 0; j < m; ++j) {
        const TimeBin t = targets[static_cast<std::size_t>(j)];
        const double prior = latent_spec_.empty() ? 0.0 : eval_spec(latent_spec_, t, t);
        const double explained = v.col(j).squaredNorm();
        auto &point = out[static_cast<std::size_t>(j)];
        point.mean = mean(j);
        point.latent_variance = std::max(prior - explained, 0.0);
        point.variance = prior + noise - explained;
    }
    return out;
}

KernelSpec optimize_hyperparams(const ObservationSeries &series, const KernelSpec &init,
                                const OptimizerConfig &config) {
    if (series.size() < 2) {
        throw InsufficientDataError("hyperparameter optimization needs at least 2 observations");
    }
    series.validate();
    const Objective objective = [&](const Eigen::VectorXd &theta, Eigen::VectorXd *grad) {
        const GPModel model(series, init.with_log_params(theta));
        if (grad != nullptr) {
            *grad = model.log_marginal_likelihood_gradient();
        }
        return model.log_marginal_likelihood();
    };
    std::vector<bool> fixed(init.num_params(), false);
    if (config.fix_period) {
        for (const auto i : init.period_param_indices()) {
            fixed[i] = true;
        }
    }
    const Eigen::VectorXd start = init.log_params();
    const auto result = maximize_with_restarts(objective, start, config, fixed);
    if (result.x == start) {
        return init;
    }
    return init.with_log_params(result.x);
}

} // namespace gpimpute
