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

#include "gpimpute/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "gpimpute/errors.hpp"
#include "text_util.hpp"

namespace gpimpute {

namespace {

class NeumaierSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            compensation_ += (sum_ - t) + x;
        } else {
            compensation_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + compensation_; }

private:
    double sum_ = 0.0;
    double compensation_ = 0.0;
};

// Sorted so every accumulation below is order-independent.
double ordered_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    NeumaierSum sum;
    for (const double v : values) {
        sum.add(v);
    }
    return sum.value();
}

std::vector<CellValue> sorted_by_cell(std::span<const CellValue> values) {
    std::vector<CellValue> out(values.begin(), values.end());
    std::sort(out.begin(), out.end(), [](const CellValue &a, const CellValue &b) { return a.cell < b.cell; });
    return out;
}

} // namespace

double MetricsReport::rae_value() const {
    if (!rae) {
        throw DomainError("RAE is undefined: held-out truth has zero variance");
    }
    return *rae;
}

double MetricsReport::r2_value() const {
    if (!r2) {
        throw DomainError("R^2 is undefined: held-out truth has zero variance");
    }
    return *r2;
}

std::string MetricsReport::csv_header() {
    return "method,config,mae,rmse,rae_pct,r2,n";
}

std::string MetricsReport::csv_row(const std::string &method, const std::string &config) const {
    const auto opt = [](const std::optional<double> &v, double scale) {
        return v ? detail::format_number(*v * scale) : std::string("nan");
    };
    return method + "," + config + "," + detail::format_number(mae) + "," + detail::format_number(rmse) + "," +
           opt(rae, 100.0) + "," + opt(r2, 1.0) + "," + std::to_string(n);
}

double truth_mean(std::span<const CellValue> truth) {
    if (truth.empty()) {
        throw DomainError("mean of an empty truth list");
    }
    std::vector<double> values;
    values.reserve(truth.size());
    for (const auto &t : truth) {
        values.push_back(t.value);
    }
    return ordered_sum(std::move(values)) / static_cast<double>(truth.size());
}

MetricsReport evaluate(std::span<const CellValue> predictions, std::span<const CellValue> truth) {
    if (truth.empty()) {
        throw DomainError("cannot evaluate an empty held-out set");
    }
    if (predictions.size() != truth.size()) {
        throw DomainError("predictions cover " + std::to_string(predictions.size()) + " cells, truth covers " +
                          std::to_string(truth.size()));
    }
    const auto pred = sorted_by_cell(predictions);
    const auto obs = sorted_by_cell(truth);
    const double mean = truth_mean(truth);
    std::vector<double> abs_err, sq_err, abs_dev, sq_dev;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        if (pred[i].cell != obs[i].cell || (i > 0 && obs[i].cell == obs[i - 1].cell)) {
            throw DomainError("predictions and truth do not cover the same set of distinct cells");
        }
        const double e = pred[i].value - obs[i].value;
        const double d = mean - obs[i].value;
        abs_err.push_back(std::abs(e));
        sq_err.push_back(e * e);
        abs_dev.push_back(std::abs(d));
        sq_dev.push_back(d * d);
    }
    const double n = static_cast<double>(obs.size());
    const double total_abs = ordered_sum(std::move(abs_err));
    const double total_sq = ordered_sum(std::move(sq_err));
    const double total_abs_dev = ordered_sum(std::move(abs_dev));
    const double total_sq_dev = ordered_sum(std::move(sq_dev));

    MetricsReport report;
    report.n = obs.size();
    report.mae = total_abs / n;
    report.rmse = std::sqrt(total_sq / n);
    if (total_sq_dev > 0.0 && total_abs_dev > 0.0) {
        report.rae = total_abs / total_abs_dev;
        report.r2 = 1.0 - total_sq / total_sq_dev;
    }
    return report;
}

MetricsReport evaluate(std::span<const Imputation> predictions, std::span<const CellValue> truth) {
    std::vector<CellValue> values;
    values.reserve(predictions.size());
    for (const auto &p : predictions) {
        values.push_back({p.cell, p.value});
    }
    return evaluate(values, truth);
}

} // namespace gpimpute
