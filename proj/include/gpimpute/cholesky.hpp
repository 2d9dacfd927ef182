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

#ifndef GPIMPUTE_CHOLESKY_HPP
#define GPIMPUTE_CHOLESKY_HPP

#include <Eigen/Dense>

namespace gpimpute {

/*
 * Cholesky factor of a symmetric covariance. Factorization is first attempted
 * on the matrix as given; on failure a diagonal jitter of 1e-8, 1e-7, ...,
 * 1e-4 times the mean diagonal is tried in turn. The applied jitter is kept
 * so callers can report the matrix that was actually factorized.
 */
class JitteredCholesky {
public:
    JitteredCholesky() = default;
    // Throws ConditioningError once the ladder is exhausted.
    explicit JitteredCholesky(const Eigen::MatrixXd &covariance);

    const Eigen::LLT<Eigen::MatrixXd> &llt() const { return llt_; }
    Eigen::MatrixXd lower() const { return llt_.matrixL(); }
    double jitter() const { return jitter_; }
    Eigen::Index size() const { return llt_.rows(); }

    Eigen::VectorXd solve(const Eigen::VectorXd &rhs) const { return llt_.solve(rhs); }
    Eigen::MatrixXd solve(const Eigen::MatrixXd &rhs) const { return llt_.solve(rhs); }
    // L^{-1} rhs
    Eigen::MatrixXd solve_lower(const Eigen::MatrixXd &rhs) const;
    Eigen::MatrixXd inverse() const;

    double log_determinant() const;

private:
    Eigen::LLT<Eigen::MatrixXd> llt_;
    double jitter_ = 0.0;
};

// Log-density of N(y | 0, V) from a factor of V and alpha = V^{-1} y.
double gaussian_log_density(const JitteredCholesky &factor, const Eigen::VectorXd &y, const Eigen::VectorXd &alpha);

} // namespace gpimpute

#endif // GPIMPUTE_CHOLESKY_HPP
