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

#ifndef GPIMPUTE_GP_HPP
#define GPIMPUTE_GP_HPP

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gpimpute/cholesky.hpp"
#include "gpimpute/kernels.hpp"
#include "gpimpute/optimizer.hpp"

namespace gpimpute {

// Observed cells of one road segment. Values are expected to be normalized
// (zero mean); `offset` and `scale` record how to map them back to km/h.
struct ObservationSeries {
    std::string segment_id;
    std::vector<TimeBin> times;
    Eigen::VectorXd values;
    double offset = 0.0;
    double scale = 1.0;

    std::size_t size() const { return times.size(); }
    // Throws DomainError unless times strictly increase and values are finite.
    void validate() const;
};

struct PosteriorPoint {
    double mean = 0.0;
    // Predictive variance of a new noisy observation.
    double variance = 0.0;
    // Variance of the noise-free latent function.
    double latent_variance = 0.0;
};

/*
 * Exact GP regression for one segment. The noise variance is whatever white
 * noise the kernel carries; V = K + sigma^2 I is factorized once on construction
 * and the model is immutable afterwards.
 */
class GPModel {
public:
    // Throws DomainError for bad input and ConditioningError if V cannot be factorized.
    GPModel(ObservationSeries series, KernelSpec spec);

    const KernelSpec &spec() const { return spec_; }
    const ObservationSeries &series() const { return series_; }
    const Eigen::MatrixXd &covariance() const { return covariance_; }
    Eigen::MatrixXd cholesky_lower() const { return factor_.lower(); }
    const Eigen::VectorXd &alpha() const { return alpha_; }
    double jitter() const { return factor_.jitter(); }

    double log_marginal_likelihood() const;
    // Gradient with respect to spec().log_params().
    Eigen::VectorXd log_marginal_likelihood_gradient() const;

    PosteriorPoint predict(TimeBin target) const;
    std::vector<PosteriorPoint> predict(std::span<const TimeBin> targets) const;

private:
    ObservationSeries series_;
    KernelSpec spec_;
    KernelSpec latent_spec_;
    Eigen::MatrixXd covariance_;
    JitteredCholesky factor_;
    Eigen::VectorXd alpha_;
};

inline GPModel fit(ObservationSeries series, KernelSpec spec) {
    return GPModel(std::move(series), std::move(spec));
}

/*
 * Maximizes the log marginal likelihood over the kernel's log-space
 * hyperparameters. Needs at least two observations.
 */
KernelSpec optimize_hyperparams(const ObservationSeries &series, const KernelSpec &init,
                                const OptimizerConfig &config = {});

} // namespace gpimpute

#endif // GPIMPUTE_GP_HPP
