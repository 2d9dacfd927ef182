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
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "gpimpute/errors.hpp"
#include "gpimpute/panel.hpp"

namespace gpimpute {
namespace {

SpeedPanel parse(const std::string &text) {
    std::istringstream in(text);
    return read_csv(in);
}

double pearson(const SpeedPanel &p, Eigen::Index a, Eigen::Index b) {
    const Eigen::ArrayXd x = p.speed.row(a).array() - p.speed.row(a).mean();
    const Eigen::ArrayXd y = p.speed.row(b).array() - p.speed.row(b).mean();
    return (x * y).sum() / std::sqrt((x * x).sum() * (y * y).sum());
}

TEST(Timestamp, ParseAndFormat) {
    EXPECT_EQ(parse_timestamp("1970-01-01T00:00:00Z"), 0);
    EXPECT_EQ(parse_timestamp("2020-03-01T12:34:56Z"), 1583066096);
    EXPECT_EQ(parse_timestamp("2020-03-01T12:34:56+00:00"), 1583066096);
    EXPECT_EQ(parse_timestamp("2020-03-01T12:34:56.75Z"), 1583066096);
    EXPECT_EQ(format_timestamp(1583066096), "2020-03-01T12:34:56Z");
    EXPECT_THROW(parse_timestamp("2020-13-01T00:00:00Z"), ParseError);
    EXPECT_THROW(parse_timestamp("yesterday"), ParseError);
}

TEST(ReadCsv, DuplicateBinsAveraged) {
    const auto p = parse("timestamp,segment_id,speed_kmh\n"
                         "2021-05-01T00:00:00Z,a,10\n"
                         "2021-05-01T00:01:00Z,a,20\n");
    ASSERT_EQ(p.num_segments(), 1);
    ASSERT_EQ(p.num_bins(), 1);
    EXPECT_TRUE(p.observed(0, 0));
    EXPECT_DOUBLE_EQ(p.speed(0, 0), 15.0);
}

TEST(ReadCsv, FloorBinning) {
    const auto p = parse("timestamp,segment_id,speed_kmh\n"
                         "2021-05-01T00:00:00Z,a,1\n"
                         "2021-05-01T00:04:59Z,a,3\n"
                         "2021-05-01T00:05:00Z,a,7\n");
    ASSERT_EQ(p.num_bins(), 2);
    EXPECT_DOUBLE_EQ(p.speed(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(p.speed(0, 1), 7.0);
    EXPECT_EQ(p.first_bin, bin_of(parse_timestamp("2021-05-01T00:00:00Z")));
}

TEST(ReadCsv, GapsAndSegmentOrder) {
    const auto p = parse("timestamp,segment_id,speed_kmh\n"
                         "2021-05-01T00:20:00Z,b,5\n"
                         "2021-05-01T00:00:00Z,a,1\n"
                         "2021-05-01T00:10:00Z,a,3\n");
    EXPECT_EQ(p.segment_ids, (std::vector<std::string>{"b", "a"}));
    ASSERT_EQ(p.num_bins(), 5);
    EXPECT_FALSE(p.observed(1, 1));
    EXPECT_TRUE(std::isnan(p.speed(1, 1)));
    EXPECT_TRUE(p.observed(0, 4));
    EXPECT_EQ(p.observed.count(), 3);
}

TEST(ReadCsv, Errors) {
    EXPECT_THROW(parse("timestamp,segment_id,speed_kmh\n"), ValidationError);
    EXPECT_THROW(parse(""), ParseError);
    EXPECT_THROW(parse("time,segment,speed\n2021-05-01T00:00:00Z,a,1\n"), ParseError);
    try {
        parse("timestamp,segment_id,speed_kmh\n2021-05-01T00:00:00Z,a,1\n2021-05-01T00:05:00Z,a\n");
        FAIL() << "expected ParseError";
    } catch (const ParseError &e) {
        EXPECT_EQ(e.line(), 3u);
    }
    EXPECT_THROW(parse("timestamp,segment_id,speed_kmh\n2021-05-01T00:00:00Z,a,-3\n"), ValidationError);
    EXPECT_THROW(parse("timestamp,segment_id,speed_kmh\n2021-05-01T00:00:00Z,a,fast\n"), ParseError);
}

TEST(WriteCsv, RoundTripAtPrintedPrecision) {
    SynthConfig config;
    config.segments = 2;
    config.bins = 300;
    config.start_bin = 5000000;
    auto panel = synthesize_panel(config);
    panel.observed(1, 17) = false;
    panel.speed(1, 17) = std::nan("");
    std::stringstream io;
    write_csv(io, panel);
    const auto back = read_csv(io);
    EXPECT_EQ(back.segment_ids, panel.segment_ids);
    EXPECT_EQ(back.first_bin, panel.first_bin);
    ASSERT_EQ(back.num_bins(), panel.num_bins());
    EXPECT_TRUE((back.observed == panel.observed).all());
    std::stringstream again;
    write_csv(again, back);
    EXPECT_EQ(again.str(), io.str());
    for (Eigen::Index r = 0; r < 2; ++r) {
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                EXPECT_NEAR(back.speed(r, t), panel.speed(r, t), 1e-8 * std::max(1.0, panel.speed(r, t)));
            }
        }
    }
}

TEST(SaveLoad, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "gpimpute_panel_roundtrip.csv";
    SynthConfig config;
    config.segments = 1;
    config.bins = 300;
    const auto panel = synthesize_panel(config);
    save_csv(path.string(), panel);
    const auto back = load_csv(path.string());
    EXPECT_EQ(back.num_bins(), 300);
    std::filesystem::remove(path);
    EXPECT_THROW(load_csv("/nonexistent/panel.csv"), ValidationError);
}

TEST(Normalize, TwoPointExample) {
    const auto p = parse("timestamp,segment_id,speed_kmh\n"
                         "2021-05-01T00:00:00Z,a,10\n"
                         "2021-05-01T00:10:00Z,a,20\n");
    const auto [n, norm] = normalize(p);
    EXPECT_DOUBLE_EQ(norm.mean[0], 15.0);
    EXPECT_DOUBLE_EQ(norm.std[0], 5.0);
    EXPECT_DOUBLE_EQ(n.speed(0, 0), -1.0);
    EXPECT_DOUBLE_EQ(n.speed(0, 2), 1.0);
    EXPECT_TRUE(std::isnan(n.speed(0, 1)));
}

TEST(Normalize, MomentsAndRoundTrip) {
    SynthConfig config;
    config.bins = 1000;
    auto panel = synthesize_panel(config);
    for (Eigen::Index t = 0; t < 1000; t += 3) {
        panel.observed(1, t) = false;
        panel.speed(1, t) = std::nan("");
    }
    const auto [n, norm] = normalize(panel);
    for (Eigen::Index r = 0; r < n.num_segments(); ++r) {
        double sum = 0.0, ss = 0.0;
        std::size_t c = 0;
        for (Eigen::Index t = 0; t < n.num_bins(); ++t) {
            if (n.observed(r, t)) {
                sum += n.speed(r, t);
                ss += n.speed(r, t) * n.speed(r, t);
                ++c;
            }
        }
        const double mean = sum / static_cast<double>(c);
        EXPECT_NEAR(mean, 0.0, 1e-12);
        EXPECT_NEAR(std::sqrt(ss / static_cast<double>(c) - mean * mean), 1.0, 1e-12);
    }
    const auto back = denormalize(n, norm);
    EXPECT_TRUE((back.observed == panel.observed).all());
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                EXPECT_NEAR(back.speed(r, t), panel.speed(r, t), 1e-12 * std::max(1.0, panel.speed(r, t)));
            } else {
                EXPECT_TRUE(std::isnan(back.speed(r, t)));
            }
        }
    }
}

TEST(Normalize, ZeroVarianceRejected) {
    const auto p = parse("timestamp,segment_id,speed_kmh\n"
                         "2021-05-01T00:00:00Z,a,10\n"
                         "2021-05-01T00:10:00Z,a,10\n");
    EXPECT_THROW(normalize(p), ValidationError);
}

TEST(Synth, Reproducible) {
    SynthConfig config;
    config.bins = 500;
    const auto a = synthesize_panel(config), b = synthesize_panel(config);
    EXPECT_EQ(a.speed, b.speed);
    config.seed = 2;
    EXPECT_NE(synthesize_panel(config).speed, a.speed);
    EXPECT_TRUE(a.observed.all());
    EXPECT_GE(a.speed.minCoeff(), 0.0);
}

TEST(Synth, CalibratedMoments) {
    SynthConfig config;
    config.segments = 1;
    config.bins = 10000;
    const auto p = synthesize_panel(config);
    const double mean = p.speed.row(0).mean();
    const double std = std::sqrt((p.speed.row(0).array() - mean).square().mean());
    EXPECT_NEAR(mean, 23.3, 0.05 * 23.3);
    EXPECT_NEAR(std, 16.9, 0.05 * 16.9);
}

TEST(Synth, CorrelationFollowsCoupling) {
    SynthConfig config;
    config.segments = 2;
    config.bins = 10000;
    config.coupling = 0.0;
    EXPECT_NEAR(pearson(synthesize_panel(config), 0, 1), 0.0, 0.1);
    config.coupling = 0.9;
    const double target = config.expected_correlation(0, 1);
    EXPECT_GE(target, 0.8);
    EXPECT_NEAR(pearson(synthesize_panel(config), 0, 1), target, 0.05);
}

TEST(Synth, InvalidConfig) {
    SynthConfig config;
    config.coupling = 1.0;
    EXPECT_THROW(synthesize_panel(config), DomainError);
    config.coupling = 0.5;
    config.std_kmh = {0.0};
    EXPECT_THROW(synthesize_panel(config), DomainError);
}

} // namespace
} // namespace gpimpute
