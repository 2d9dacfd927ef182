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

#ifndef GPIMPUTE_MOGP_HPP
#define GPIMPUTE_MOGP_HPP

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gpimpute/cell.hpp"
#include "gpimpute/cholesky.hpp"
#include "gpimpute/kernels.hpp"
#include "gpimpute/optimizer.hpp"

namespace gpimpute {

/*
 * Gaussian smoothing kernels k_rq(tau) = v_rq exp(-A_rq tau^2 / 2) that map
 * latent white-noise process q onto output r. Both matrices are R x Q.
 * Amplitudes carry a sign; precisions must be positive.
 */
struct ConvKernelParams {
    Eigen::MatrixXd amplitude;
    Eigen::MatrixXd precision;

    Eigen::Index num_outputs() const { return amplitude.rows(); }
    Eigen::Index num_latents() const { return amplitude.cols(); }
    void validate() const;
};

// Closed-form cov[s_r(t), s_h(t')] for lag = t - t'.
double cross_cov_s(const ConvKernelParams &params, Eigen::Index r, Eigen::Index h, double lag);

// Same covariance by adaptive Gauss-Kronrod integration over the latent
// input; a validation oracle for cross_cov_s. Throws OracleError when the
// error estimate exceeds 1e-9.
double quadrature_cross_cov(const ConvKernelParams &params, Eigen::Index r, Eigen::Index h, double lag);

/*
 * Full multi-output prior: shared convolution process plus an independent
 * temporal kernel (no white noise) and a noise variance per segment.
 *
 * Parameter vector order used by params()/with_params():
 *   amplitude(r, q)         row-major, raw
 *   log precision(r, q)     row-major
 *   temporal[r] log params  segment by segment (KernelSpec order)
 *   log noise[r]
 */
struct MOGPSpec {
    std::vector<std::string> segment_ids;
    ConvKernelParams conv;
    std::vector<KernelSpec> temporal;
    std::vector<double> noise;

    std::size_t num_outputs() const { return segment_ids.size(); }
    Eigen::Index num_latents() const { return conv.num_latents(); }
    void validate() const;

    std::size_t num_params() const;
    Eigen::VectorXd params() const;
    MOGPSpec with_params(const Eigen::Ref<const Eigen::VectorXd> &x) const;
    std::vector<std::size_t> period_param_indices() const;

    // Line-oriented text document; numbers at 9 significant digits.
    std::string to_string() const;
    static MOGPSpec parse(std::string_view text);
};

// Noise-free covariance between two cell lists (convolution + temporal terms).
Eigen::MatrixXd cross_cov(const MOGPSpec &spec, std::span<const Cell> rows, std::span<const Cell> cols);

// V = K + Sigma over `layout`.
Eigen::MatrixXd full_cov(const MOGPSpec &spec, std::span<const Cell> layout);

// dV/dx_i for every entry of spec.params().
std::vector<Eigen::MatrixXd> full_cov_gradients(const MOGPSpec &spec, std::span<const Cell> layout);

struct JointPosterior {
    std::vector<Cell> targets;
    Eigen::VectorXd mean;
    // Predictive covariance of new noisy observations at the targets.
    Eigen::MatrixXd covariance;
};

/*
 * Fitted multi-output GP. Observations are stored in the canonical layout
 * regardless of the order they were passed in.
 */
class MOGPModel {
public:
    // Throws DomainError on an empty/ill-formed input, ConditioningError if V cannot be factorized.
    MOGPModel(MOGPSpec spec, std::vector<CellValue> observations);

    const MOGPSpec &spec() const { return spec_; }
    const std::vector<Cell> &layout() const { return layout_; }
    const Eigen::VectorXd &values() const { return values_; }
    const Eigen::MatrixXd &covariance() const { return covariance_; }
    Eigen::MatrixXd cholesky_lower() const { return factor_.lower(); }
    const Eigen::VectorXd &alpha() const { return alpha_; }
    double jitter() const { return factor_.jitter(); }

    double log_marginal_likelihood() const;
    Eigen::VectorXd log_marginal_likelihood_gradient() const;

    JointPosterior predict(std::span<const Cell> targets) const;

private:
    MOGPSpec spec_;
    std::vector<Cell> layout_;
    Eigen::VectorXd values_;
    Eigen::MatrixXd covariance_;
    JitteredCholesky factor_;
    Eigen::VectorXd alpha_;
};

inline MOGPModel mogp_fit(MOGPSpec spec, std::vector<CellValue> observations) {
    return MOGPModel(std::move(spec), std::move(observations));
}

MOGPSpec mogp_optimize(const std::vector<CellValue> &observations, const MOGPSpec &init,
                       const OptimizerConfig &config = {});

/*
 * Starting point for joint optimization: Q = R latents, precisions
 * 1 / length^2, a diagonal-dominant amplitude matrix (off-diagonal 0.1 of the
 * diagonal) carrying `shared_fraction` of each segment's variance, and the
 * per-segment temporal specs with their output scales shrunk to carry the rest.
 * `single_output` are fitted single-output specs (SE+PER+WN); `stds` the
 * sample std of each segment's observed values.
 */
MOGPSpec initial_mogp_spec(const std::vector<std::string> &segment_ids, const std::vector<KernelSpec> &single_output,
                           const std::vector<double> &stds, double length = 12.0, double shared_fraction = 0.5);

} // namespace gpimpute

#endif // GPIMPUTE_MOGP_HPP
