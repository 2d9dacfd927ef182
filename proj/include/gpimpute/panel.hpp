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

#ifndef GPIMPUTE_PANEL_HPP
#define GPIMPUTE_PANEL_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gpimpute/cell.hpp"
#include "gpimpute/gp.hpp"

namespace gpimpute {

constexpr std::int64_t kBinSeconds = 300;
constexpr TimeBin kBinsPerDay = 288;

using BoolArray = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/*
 * R segments x T consecutive 5-minute bins. Column t corresponds to epoch bin
 * first_bin + t; Cell::bin always refers to the column index. Missing cells
 * hold NaN in `speed`.
 */
struct SpeedPanel {
    std::vector<std::string> segment_ids;
    TimeBin first_bin = 0;
    Eigen::MatrixXd speed;
    BoolArray observed;

    static SpeedPanel empty_like(std::vector<std::string> ids, TimeBin first_bin, Eigen::Index bins);

    Eigen::Index num_segments() const { return speed.rows(); }
    Eigen::Index num_bins() const { return speed.cols(); }
    bool is_observed(std::size_t segment, TimeBin bin) const;
    std::size_t segment_index(const std::string &id) const;
    std::size_t observed_count(std::size_t segment) const;

    // Throws ValidationError on shape mismatch, non-finite or negative observed values.
    void validate() const;

    std::vector<CellValue> observed_cells(std::size_t segment, TimeBin begin, TimeBin end) const;
    ObservationSeries series(std::size_t segment, TimeBin begin, TimeBin end) const;
};

struct Normalization {
    std::vector<double> mean;
    std::vector<double> std;

    double to_speed(std::size_t segment, double normalized) const { return normalized * std[segment] + mean[segment]; }
    double to_normalized(std::size_t segment, double speed) const { return (speed - mean[segment]) / std[segment]; }
};

// Per-segment standardization over observed cells (population std).
// Throws ValidationError for a segment with < 2 observations or zero variance.
std::pair<SpeedPanel, Normalization> normalize(const SpeedPanel &panel);
SpeedPanel denormalize(const SpeedPanel &panel, const Normalization &norm);

// CSV with header `timestamp,segment_id,speed_kmh`, ISO-8601 UTC timestamps.
SpeedPanel read_csv(std::istream &in);
SpeedPanel load_csv(const std::string &path);
// Same schema, segment-major, missing cells omitted, speeds at 9 significant digits.
void write_csv(std::ostream &out, const SpeedPanel &panel);
void save_csv(const std::string &path, const SpeedPanel &panel);

// Epoch seconds for "YYYY-MM-DDTHH:MM:SS[.fff][Z|+00:00]"; throws ParseError.
std::int64_t parse_timestamp(const std::string &text);
std::string format_timestamp(std::int64_t epoch_seconds);
TimeBin bin_of(std::int64_t epoch_seconds);

struct SynthConfig {
    std::size_t segments = 3;
    std::size_t bins = 2016;
    std::vector<std::string> segment_ids;     // defaults to seg0, seg1, ...
    std::vector<double> mean_kmh{23.3};        // one value, or one per segment
    std::vector<double> std_kmh{16.9};
    double coupling = 0.9;                     // rho in [0, 1)
    TimeBin coupling_lag = 0;                  // segment r lags the shared signal by r * lag bins
    double daily_amplitude = 8.0;              // km/h, sinusoid with a 288-bin period
    double noise_std = 2.0;                    // km/h, independent per cell
    double ar_coefficient = 0.95;
    TimeBin start_bin = 0;
    std::uint64_t seed = 1;

    void validate() const;
    double mean_of(std::size_t segment) const;
    double std_of(std::size_t segment) const;
    // Pearson correlation between two segments at zero lag before clamping.
    double expected_correlation(std::size_t a, std::size_t b) const;
};

/*
 * Shared latent signal (daily sinusoid + AR(1)) mixed into each segment with
 * weight sqrt(rho), an independent AR(1) with weight sqrt(1 - rho), and white
 * observation noise. Each segment is then mapped affinely and clamped at
 * 0 km/h, with the affine map calibrated so the clamped series has the
 * configured mean and std. Fully observed; bit-reproducible per seed.
 */
SpeedPanel synthesize_panel(const SynthConfig &config);

} // namespace gpimpute

#endif // GPIMPUTE_PANEL_HPP
