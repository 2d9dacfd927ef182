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

#include <cmath>

#include <gtest/gtest.h>

#include "gpimpute/baselines.hpp"
#include "gpimpute/errors.hpp"
#include "gpimpute/metrics.hpp"
#include "gpimpute/missingness.hpp"
#include "gpimpute/random.hpp"

namespace gpimpute {
namespace {

SpeedPanel panel_from(const std::vector<std::vector<double>> &rows) {
    std::vector<std::string> ids;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        ids.push_back("s" + std::to_string(r));
    }
    auto p = SpeedPanel::empty_like(ids, 0, static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            if (!std::isnan(rows[r][c])) {
                p.speed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
                p.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = true;
            }
        }
    }
    return p;
}

void hide(SpeedPanel &p, const Cell &c) {
    p.observed(static_cast<Eigen::Index>(c.segment), c.bin) = false;
    p.speed(static_cast<Eigen::Index>(c.segment), c.bin) = std::nan("");
}

const double kMiss = std::nan("");

TEST(Naive, CarriesLastObservation) {
    const auto p = panel_from({{10, kMiss, kMiss}});
    const std::vector<Cell> targets{{0, 1}, {0, 2}};
    const auto out = naive_impute(p, targets);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].value, 10.0);
    EXPECT_EQ(out[1].value, 10.0);
    EXPECT_FALSE(out[0].fallback);
}

TEST(Naive, FallsBackToSegmentMean) {
    const auto p = panel_from({{kMiss, 4, 8}});
    const std::vector<Cell> targets{{0, 0}};
    const auto out = naive_impute(p, targets);
    EXPECT_EQ(out[0].value, 6.0);
    EXPECT_TRUE(out[0].fallback);
}

TEST(Naive, EmptyTargets) {
    EXPECT_TRUE(naive_impute(panel_from({{1, 2, 3}}), {}).empty());
}

TEST(Features, NearestObservedSkippingGaps) {
    std::vector<double> row(30);
    for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = static_cast<double>(i);
    }
    row[12] = kMiss;
    row[16] = kMiss;
    auto p = panel_from({row, std::vector<double>(30, 50.0)});
    hide(p, {1, 14});
    const auto means = segment_means(p);
    const std::vector<std::size_t> nbr{1};
    const auto f = feature_row(p, {0, 14}, nbr, means);
    ASSERT_EQ(f.features.size(), 11);
    const Eigen::VectorXd expected = (Eigen::VectorXd(11) << 13, 11, 10, 9, 8, 15, 17, 18, 19, 20, 50).finished();
    EXPECT_EQ(f.features, expected);
    EXPECT_TRUE(f.temporal_complete);
    EXPECT_FALSE(f.neighbors_observed);
    EXPECT_EQ(f.target, 14.0);
}

TEST(Features, EdgesMeanFilled) {
    auto p = panel_from({{2, 4, 6, 8}});
    const auto means = segment_means(p);
    const auto f = feature_row(p, {0, 0}, {}, means);
    EXPECT_FALSE(f.temporal_complete);
    EXPECT_EQ(f.features(0), 5.0);
    EXPECT_EQ(f.features(5), 4.0);
    EXPECT_EQ(f.features(8), 5.0);
}

TEST(LinReg, RecoversLinearTrendExactly) {
    std::vector<double> row(200);
    for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = 40.0 + 0.1 * static_cast<double>(i);
    }
    auto p = panel_from({row});
    // Every other cell is hidden; targets are the interior ones with complete context.
    std::vector<Cell> targets;
    for (TimeBin t = 1; t < 200; t += 2) {
        hide(p, {0, t});
        if (t > 10 && t < 190) {
            targets.push_back({0, t});
        }
    }
    const auto out = linreg_impute(p, targets, {});
    for (const auto &imp : out) {
        EXPECT_NEAR(imp.value, row[static_cast<std::size_t>(imp.cell.bin)], 1e-8);
    }
}

TEST(LinReg, ConstantPanel) {
    auto p = panel_from({std::vector<double>(100, 33.0), std::vector<double>(100, 12.0)});
    std::vector<Cell> targets;
    for (TimeBin t = 3; t < 100; t += 7) {
        targets.push_back({0, t});
        hide(p, {0, t});
    }
    const std::vector<std::size_t> nbr{1};
    for (const auto &imp : linreg_impute(p, targets, nbr)) {
        EXPECT_NEAR(imp.value, 33.0, 1e-9);
    }
}

TEST(LinReg, NeedsTwentyRows) {
    auto p = panel_from({std::vector<double>(25, 1.0)});
    hide(p, {0, 12});
    const std::vector<Cell> targets{{0, 12}};
    EXPECT_THROW(linreg_impute(p, targets, {}), InsufficientDataError);
}

TEST(Knn, ExactMatchWithSingleNeighbor) {
    // Period-20 pattern: the row one period later has identical features.
    Rng rng(3);
    std::vector<double> pattern(20);
    for (auto &v : pattern) {
        v = uniform(rng, 10, 60);
    }
    std::vector<double> row(200);
    for (std::size_t i = 0; i < row.size(); ++i) {
        row[i] = pattern[i % 20];
    }
    auto p = panel_from({row});
    const std::vector<Cell> targets{{0, 47}};
    hide(p, targets[0]);
    const auto out = knn_impute(p, targets, {}, 1);
    EXPECT_EQ(out[0].value, row[47]);
}

TEST(Knn, FullPoolIsInverseDistanceMean) {
    Rng rng(4);
    std::vector<double> a(60), b(60);
    for (std::size_t i = 0; i < 60; ++i) {
        a[i] = uniform(rng, 0, 50);
        b[i] = uniform(rng, 0, 50);
    }
    auto p = panel_from({a, b});
    const std::vector<Cell> targets{{0, 30}};
    hide(p, targets[0]);
    hide(p, {1, 10});
    const std::vector<std::size_t> nbr{1};
    const auto means = segment_means(p);
    const auto query = feature_row(p, targets[0], nbr, means);
    double num = 0.0, den = 0.0, lo = 1e300, hi = -1e300;
    std::size_t pool = 0;
    for (TimeBin t = 0; t < 60; ++t) {
        if (!p.is_observed(0, t)) {
            continue;
        }
        const auto row = feature_row(p, {0, t}, nbr, means);
        if (row.temporal_complete && row.neighbors_observed) {
            const double w = 1.0 / ((row.features - query.features).norm() + 1e-9);
            num += w * row.target;
            den += w;
            lo = std::min(lo, row.target);
            hi = std::max(hi, row.target);
            ++pool;
        }
    }
    const auto out = knn_impute(p, targets, nbr, pool);
    EXPECT_NEAR(out[0].value, num / den, 1e-10);
    EXPECT_GE(out[0].value, lo);
    EXPECT_LE(out[0].value, hi);
    EXPECT_NEAR(knn_impute(p, targets, nbr, pool + 50)[0].value, num / den, 1e-10);
}

TEST(Knn, EquidistantCandidatesAveraged) {
    // Constant features everywhere: every candidate is at distance 0.
    auto p = panel_from({std::vector<double>(40, 7.0)});
    const std::vector<Cell> targets{{0, 20}};
    hide(p, targets[0]);
    EXPECT_DOUBLE_EQ(knn_impute(p, targets, {}, 5)[0].value, 7.0);
}

TEST(Knn, ConvexCombination) {
    Rng rng(5);
    std::vector<double> row(300);
    for (auto &v : row) {
        v = uniform(rng, 0, 80);
    }
    auto p = panel_from({row});
    std::vector<Cell> targets;
    for (TimeBin t = 7; t < 300; t += 13) {
        targets.push_back({0, t});
        hide(p, {0, t});
    }
    double lo = 1e300, hi = -1e300;
    for (TimeBin t = 0; t < 300; ++t) {
        if (p.is_observed(0, t)) {
            lo = std::min(lo, p.speed(0, t));
            hi = std::max(hi, p.speed(0, t));
        }
    }
    for (const auto &imp : knn_impute(p, targets, {}, 10)) {
        EXPECT_TRUE(std::isfinite(imp.value));
        EXPECT_GE(imp.value, lo);
        EXPECT_LE(imp.value, hi);
    }
}

TEST(Knn, EmptyPoolAndBadK) {
    auto p = panel_from({{1, 2, 3, 4, 5}});
    const std::vector<Cell> targets{{0, 2}};
    hide(p, targets[0]);
    EXPECT_THROW(knn_impute(p, targets, {}, 3), InsufficientDataError);
    EXPECT_THROW(knn_impute(p, targets, {}, 0), DomainError);
}

TEST(Baselines, LearnedMethodsBeatNaiveOnCorrelatedPanels) {
    int linreg_wins = 0, knn_wins = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        SynthConfig config;
        config.segments = 2;
        config.bins = 500;
        config.seed = seed;
        const auto panel = synthesize_panel(config);
        const auto masked = apply_mask(panel, mcar_mask(2, 500, 0.25, seed));
        std::vector<Cell> targets;
        std::vector<CellValue> truth;
        for (const auto &h : masked.held_out) {
            if (h.cell.segment == 0) {
                targets.push_back(h.cell);
                truth.push_back(h);
            }
        }
        const std::vector<std::size_t> nbr{1};
        const double naive = evaluate(naive_impute(masked.panel, targets), truth).rmse;
        const auto lin = linreg_impute(masked.panel, targets, nbr);
        const auto knn = knn_impute(masked.panel, targets, nbr);
        for (const auto &imp : lin) {
            ASSERT_TRUE(std::isfinite(imp.value));
        }
        linreg_wins += evaluate(lin, truth).rmse < naive ? 1 : 0;
        knn_wins += evaluate(knn, truth).rmse < naive ? 1 : 0;
    }
    EXPECT_GE(linreg_wins, 7);
    EXPECT_GE(knn_wins, 7);
}

TEST(Baselines, Deterministic) {
    SynthConfig config;
    config.segments = 2;
    config.bins = 400;
    const auto panel = synthesize_panel(config);
    const auto masked = apply_mask(panel, mcar_mask(2, 400, 0.3, 1));
    std::vector<Cell> targets;
    for (const auto &h : masked.held_out) {
        targets.push_back(h.cell);
    }
    const std::vector<std::size_t> nbr{0, 1};
    const auto a = knn_impute(masked.panel, targets, nbr), b = knn_impute(masked.panel, targets, nbr);
    const auto c = linreg_impute(masked.panel, targets, nbr), d = linreg_impute(masked.panel, targets, nbr);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        EXPECT_EQ(a[i].value, b[i].value);
        EXPECT_EQ(c[i].value, d[i].value);
    }
}

} // namespace
} // namespace gpimpute
