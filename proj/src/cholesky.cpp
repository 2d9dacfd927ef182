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

#include "gpimpute/cholesky.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gpimpute/errors.hpp"

namespace gpimpute {

namespace {

bool factor_ok(const Eigen::LLT<Eigen::MatrixXd> &llt) {
    if (llt.info() != Eigen::Success) {
        return false;
    }
    const Eigen::VectorXd diag = llt.matrixLLT().diagonal();
    return diag.allFinite() && (diag.array() > 0.0).all();
}

} // namespace

JitteredCholesky::JitteredCholesky(const Eigen::MatrixXd &covariance) {
    if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
        throw ConditioningError("covariance must be a non-empty square matrix");
    }
    if (!covariance.allFinite()) {
        throw ConditioningError("covariance has non-finite entries");
    }
    llt_.compute(covariance);
    if (factor_ok(llt_)) {
        return;
    }
    const double mean_diag = std::abs(covariance.diagonal().mean());
    const Eigen::Index n = covariance.rows();
    for (double rel = 1e-8; rel <= 1e-4 * (1.0 + 1e-9); rel *= 10.0) {
        jitter_ = rel * mean_diag;
        llt_.compute(covariance + jitter_ * Eigen::MatrixXd::Identity(n, n));
        if (factor_ok(llt_)) {
            return;
        }
    }
    throw ConditioningError("Cholesky factorization failed after jitter up to 1e-4 of mean diagonal (n=" +
                            std::to_string(n) + ")");
}

Eigen::MatrixXd JitteredCholesky::solve_lower(const Eigen::MatrixXd &rhs) const {
    return llt_.matrixL().solve(rhs);
}

Eigen::MatrixXd JitteredCholesky::inverse() const {
    // V^{-1} = L^{-T} L^{-1}
    const Eigen::MatrixXd l_inv = llt_.matrixL().solve(Eigen::MatrixXd::Identity(size(), size()));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size(), size());
    out.selfadjointView<Eigen::Lower>().rankUpdate(l_inv.transpose());
    out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    return out;
}

double JitteredCholesky::log_determinant() const {
    return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

double gaussian_log_density(const JitteredCholesky &factor, const Eigen::VectorXd &y, const Eigen::VectorXd &alpha) {
    const double n = static_cast<double>(y.size());
    return -0.5 * y.dot(alpha) - 0.5 * factor.log_determinant() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

} // namespace gpimpute
