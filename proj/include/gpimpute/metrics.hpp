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

#ifndef GPIMPUTE_METRICS_HPP
#define GPIMPUTE_METRICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpimpute/cell.hpp"

namespace gpimpute {

struct MetricsReport {
    double mae = 0.0;
    double rmse = 0.0;
    // Undefined (nullopt) when the held-out truth has zero variance.
    std::optional<double> rae;
    std::optional<double> r2;
    std::size_t n = 0;

    // Throws DomainError if rae/r2 are undefined.
    double rae_value() const;
    double r2_value() const;

    // method,config,mae,rmse,rae_pct,r2,n
    std::string csv_row(const std::string &method, const std::string &config) const;
    static std::string csv_header();
};

/*
 * Mean of the values, independent of their order (Neumaier summation over the
 * sorted values). This is the y-bar used by evaluate().
 */
double truth_mean(std::span<const CellValue> truth);

// Throws DomainError when the two lists do not cover the same cells, or when empty.
MetricsReport evaluate(std::span<const CellValue> predictions, std::span<const CellValue> truth);
MetricsReport evaluate(std::span<const Imputation> predictions, std::span<const CellValue> truth);

} // namespace gpimpute

#endif // GPIMPUTE_METRICS_HPP
