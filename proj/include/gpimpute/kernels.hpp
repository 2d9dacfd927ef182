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

#ifndef GPIMPUTE_KERNELS_HPP
#define GPIMPUTE_KERNELS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "gpimpute/cell.hpp"

namespace gpimpute {

// Kernels take real-valued times so that lags can be evaluated uniformly, but
// white-noise identity is decided on the integer TimeBin.

double eval_se(double t, double t_prime, double h, double length);
double eval_periodic(double t, double t_prime, double h, double length, double period);
double eval_white_noise(TimeBin t, TimeBin t_prime, double variance);

enum class KernelKind { SquaredExponential, Periodic, WhiteNoise };

/*
 * A single covariance term. `scale` is the output scale h for SE and PER and
 * the variance for WN. `length` is the SE length-scale in bins or the PER
 * roughness (dimensionless); `period` is only used by PER.
 */
struct KernelLeaf {
    KernelKind kind = KernelKind::SquaredExponential;
    double scale = 1.0;
    double length = 1.0;
    double period = 0.0;

    static KernelLeaf se(double h, double length);
    static KernelLeaf periodic(double h, double length, double period);
    static KernelLeaf white_noise(double variance);

    std::size_t num_params() const;
    double operator()(TimeBin t, TimeBin t_prime) const;

    bool operator==(const KernelLeaf &) const = default;
};

/*
 * Sum of covariance leaves. Immutable after construction; every leaf is
 * validated (strictly positive, finite parameters) on the way in.
 *
 * Log-space parameter order, leaf by leaf in expression order:
 *   SE  -> log h, log l
 *   PER -> log h, log l, log p
 *   WN  -> log var
 */
class KernelSpec {
public:
    KernelSpec() = default;
    explicit KernelSpec(std::vector<KernelLeaf> leaves);

    // Text form, e.g. "SE(h=5,l=12)+PER(h=3,l=1,p=288)+WN(var=4)".
    static KernelSpec parse(std::string_view text);
    std::string to_string() const;

    const std::vector<KernelLeaf> &leaves() const { return leaves_; }
    bool empty() const { return leaves_.empty(); }
    std::size_t num_params() const;

    Eigen::VectorXd log_params() const;
    KernelSpec with_log_params(const Eigen::Ref<const Eigen::VectorXd> &theta) const;
    std::vector<std::string> param_names() const;
    // Positions of every log-period entry in log_params().
    std::vector<std::size_t> period_param_indices() const;

    // Sum of the WN variances (0 if there is no WN leaf).
    double noise_variance() const;
    KernelSpec without_white_noise() const;
    bool has_white_noise() const;

    KernelSpec operator+(const KernelSpec &other) const;
    bool operator==(const KernelSpec &) const = default;

private:
    std::vector<KernelLeaf> leaves_;
};

// Throws DomainError for an empty spec.
double eval_spec(const KernelSpec &spec, TimeBin t, TimeBin t_prime);

Eigen::MatrixXd gram(const KernelSpec &spec, std::span<const TimeBin> times);
// Rectangular covariance between two time sets (rows = `rows`).
Eigen::MatrixXd cross_gram(const KernelSpec &spec, std::span<const TimeBin> rows, std::span<const TimeBin> cols);

// dK/dtheta_i for every log-space parameter, in log_params() order.
std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec &spec, std::span<const TimeBin> times);

// The default temporal composition used for imputation, in normalized units.
KernelSpec default_temporal_spec();

} // namespace gpimpute

#endif // GPIMPUTE_KERNELS_HPP
