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

#include "gpimpute/panel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "gpimpute/errors.hpp"
#include "gpimpute/random.hpp"
#include "text_util.hpp"

namespace gpimpute {

SpeedPanel SpeedPanel::empty_like(std::vector<std::string> ids, TimeBin first_bin, Eigen::Index bins) {
    SpeedPanel panel;
    const auto rows = static_cast<Eigen::Index>(ids.size());
    panel.segment_ids = std::move(ids);
    panel.first_bin = first_bin;
    panel.speed = Eigen::MatrixXd::Constant(rows, bins, std::numeric_limits<double>::quiet_NaN());
    panel.observed = BoolArray::Constant(rows, bins, false);
    return panel;
}

bool SpeedPanel::is_observed(std::size_t segment, TimeBin bin) const {
    return observed(static_cast<Eigen::Index>(segment), static_cast<Eigen::Index>(bin));
}

std::size_t SpeedPanel::segment_index(const std::string &id) const {
    const auto it = std::find(segment_ids.begin(), segment_ids.end(), id);
    if (it == segment_ids.end()) {
        throw DomainError("unknown segment '" + id + "'");
    }
    return static_cast<std::size_t>(it - segment_ids.begin());
}

std::size_t SpeedPanel::observed_count(std::size_t segment) const {
    return static_cast<std::size_t>(observed.row(static_cast<Eigen::Index>(segment)).count());
}

void SpeedPanel::validate() const {
    if (static_cast<Eigen::Index>(segment_ids.size()) != speed.rows() || observed.rows() != speed.rows() ||
        observed.cols() != speed.cols()) {
        throw ValidationError("panel shape is inconsistent");
    }
    for (Eigen::Index r = 0; r < speed.rows(); ++r) {
        for (Eigen::Index t = 0; t < speed.cols(); ++t) {
            if (observed(r, t) && (!std::isfinite(speed(r, t)) || speed(r, t) < 0.0)) {
                throw ValidationError("segment '" + segment_ids[static_cast<std::size_t>(r)] + "' bin " +
                                      std::to_string(t) + " has invalid speed");
            }
        }
    }
}

std::vector<CellValue> SpeedPanel::observed_cells(std::size_t segment, TimeBin begin, TimeBin end) const {
    std::vector<CellValue> out;
    const auto r = static_cast<Eigen::Index>(segment);
    for (TimeBin t = std::max<TimeBin>(begin, 0); t < std::min<TimeBin>(end, num_bins()); ++t) {
        if (observed(r, static_cast<Eigen::Index>(t))) {
            out.push_back({{segment, t}, speed(r, static_cast<Eigen::Index>(t))});
        }
    }
    return out;
}

ObservationSeries SpeedPanel::series(std::size_t segment, TimeBin begin, TimeBin end) const {
    ObservationSeries s;
    s.segment_id = segment_ids.at(segment);
    const auto cells = observed_cells(segment, begin, end);
    s.values.resize(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t i = 0; i < cells.size(); ++i) {
        s.times.push_back(cells[i].cell.bin);
        s.values(static_cast<Eigen::Index>(i)) = cells[i].value;
    }
    return s;
}

std::pair<SpeedPanel, Normalization> normalize(const SpeedPanel &panel) {
    Normalization norm;
    SpeedPanel out = panel;
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        double sum = 0.0;
        std::size_t n = 0;
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                sum += panel.speed(r, t);
                ++n;
            }
        }
        const auto &id = panel.segment_ids[static_cast<std::size_t>(r)];
        if (n < 2) {
            throw ValidationError("segment '" + id + "' needs at least 2 observed cells to normalize");
        }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                ss += (panel.speed(r, t) - mean) * (panel.speed(r, t) - mean);
            }
        }
        const double std = std::sqrt(ss / static_cast<double>(n));
        if (!(std > 0.0)) {
            throw ValidationError("segment '" + id + "' has zero variance");
        }
        norm.mean.push_back(mean);
        norm.std.push_back(std);
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                out.speed(r, t) = (panel.speed(r, t) - mean) / std;
            }
        }
    }
    return {std::move(out), std::move(norm)};
}

SpeedPanel denormalize(const SpeedPanel &panel, const Normalization &norm) {
    if (norm.mean.size() != static_cast<std::size_t>(panel.num_segments()) || norm.std.size() != norm.mean.size()) {
        throw DomainError("normalization record does not match the panel");
    }
    SpeedPanel out = panel;
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                out.speed(r, t) = norm.to_speed(static_cast<std::size_t>(r), panel.speed(r, t));
            }
        }
    }
    return out;
}

namespace {

std::optional<int> parse_int(std::string_view text) {
    int value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size() || text.empty()) {
        return std::nullopt;
    }
    return value;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) {
        --q;
    }
    return q;
}

} // namespace

std::int64_t parse_timestamp(const std::string &raw) {
    const std::string_view text = detail::trim(raw);
    const auto bad = [&]() -> ParseError { return ParseError("bad ISO-8601 timestamp '" + std::string(raw) + "'"); };
    if (text.size() < 19 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        throw bad();
    }
    const auto year = parse_int(text.substr(0, 4));
    const auto month = parse_int(text.substr(5, 2));
    const auto day = parse_int(text.substr(8, 2));
    const auto hour = parse_int(text.substr(11, 2));
    const auto minute = parse_int(text.substr(14, 2));
    const auto second = parse_int(text.substr(17, 2));
    if (!year || !month || !day || !hour || !minute || !second || *hour > 23 || *minute > 59 || *second > 60) {
        throw bad();
    }
    std::string_view rest = text.substr(19);
    if (!rest.empty() && rest.front() == '.') {
        std::size_t i = 1;
        while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) {
            ++i;
        }
        if (i == 1) {
            throw bad();
        }
        rest.remove_prefix(i);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00" || rest == "+0000")) {
        throw bad();
    }
    const std::chrono::year_month_day ymd{std::chrono::year{*year}, std::chrono::month{static_cast<unsigned>(*month)},
                                          std::chrono::day{static_cast<unsigned>(*day)}};
    if (!ymd.ok()) {
        throw bad();
    }
    const auto days = std::chrono::sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 86400 + *hour * 3600 + *minute * 60 + *second;
}

std::string format_timestamp(std::int64_t epoch_seconds) {
    const std::int64_t days = floor_div(epoch_seconds, 86400);
    const std::int64_t secs = epoch_seconds - days * 86400;
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(secs / 3600),
                  static_cast<int>((secs / 60) % 60), static_cast<int>(secs % 60));
    return buffer;
}

TimeBin bin_of(std::int64_t epoch_seconds) {
    return floor_div(epoch_seconds, kBinSeconds);
}

SpeedPanel read_csv(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    bool header = false;
    std::vector<std::string> ids;
    std::map<std::string, std::size_t> index;
    // (segment, bin) -> (sum, count)
    std::map<std::pair<std::size_t, TimeBin>, std::pair<double, std::size_t>> cells;
    TimeBin lo = std::numeric_limits<TimeBin>::max();
    TimeBin hi = std::numeric_limits<TimeBin>::min();

    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = detail::trim(line);
        if (trimmed.empty()) {
            continue;
        }
        if (!header) {
            if (trimmed != "timestamp,segment_id,speed_kmh") {
                throw ParseError("expected header 'timestamp,segment_id,speed_kmh'", line_no);
            }
            header = true;
            continue;
        }
        const auto fields = detail::split(trimmed, ',');
        if (fields.size() != 3) {
            throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), line_no);
        }
        std::int64_t epoch = 0;
        try {
            epoch = parse_timestamp(std::string(fields[0]));
        } catch (const ParseError &e) {
            throw ParseError(e.what(), line_no);
        }
        const std::string id(detail::trim(fields[1]));
        if (id.empty()) {
            throw ParseError("empty segment_id", line_no);
        }
        const auto speed = detail::parse_double(fields[2]);
        if (!speed || !std::isfinite(*speed)) {
            throw ParseError("bad speed '" + std::string(fields[2]) + "'", line_no);
        }
        if (*speed < 0.0) {
            throw ValidationError("line " + std::to_string(line_no) + ": negative speed " +
                                  detail::format_number(*speed));
        }
        const auto [it, inserted] = index.emplace(id, ids.size());
        if (inserted) {
            ids.push_back(id);
        }
        const TimeBin bin = bin_of(epoch);
        lo = std::min(lo, bin);
        hi = std::max(hi, bin);
        auto &acc = cells[{it->second, bin}];
        acc.first += *speed;
        acc.second += 1;
    }
    if (!header) {
        throw ParseError("missing CSV header");
    }
    if (cells.empty()) {
        throw ValidationError("panel CSV has no data rows");
    }
    SpeedPanel panel = SpeedPanel::empty_like(std::move(ids), lo, hi - lo + 1);
    for (const auto &[key, acc] : cells) {
        const auto r = static_cast<Eigen::Index>(key.first);
        const auto t = static_cast<Eigen::Index>(key.second - lo);
        panel.speed(r, t) = acc.first / static_cast<double>(acc.second);
        panel.observed(r, t) = true;
    }
    return panel;
}

SpeedPanel load_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open panel CSV '" + path + "'");
    }
    return read_csv(in);
}

void write_csv(std::ostream &out, const SpeedPanel &panel) {
    out << "timestamp,segment_id,speed_kmh\n";
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (panel.observed(r, t)) {
                out << format_timestamp((panel.first_bin + t) * kBinSeconds) << ','
                    << panel.segment_ids[static_cast<std::size_t>(r)] << ','
                    << detail::format_number(panel.speed(r, t)) << '\n';
            }
        }
    }
}

void save_csv(const std::string &path, const SpeedPanel &panel) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write panel CSV '" + path + "'");
    }
    write_csv(out, panel);
}

void SynthConfig::validate() const {
    if (segments < 1 || bins < 2) {
        throw DomainError("synthetic panel needs >= 1 segment and >= 2 bins");
    }
    if (!segment_ids.empty() && segment_ids.size() != segments) {
        throw DomainError("segment_ids must list one id per segment");
    }
    const auto check_list = [&](const std::vector<double> &v, const char *name) {
        if (v.size() != 1 && v.size() != segments) {
            throw DomainError(std::string(name) + " must have 1 or `segments` entries");
        }
    };
    check_list(mean_kmh, "mean_kmh");
    check_list(std_kmh, "std_kmh");
    if (!(coupling >= 0.0 && coupling < 1.0)) {
        throw DomainError("coupling must lie in [0, 1)");
    }
    if (coupling_lag < 0) {
        throw DomainError("coupling_lag must be non-negative");
    }
    if (!(noise_std >= 0.0) || !(daily_amplitude >= 0.0)) {
        throw DomainError("noise_std and daily_amplitude must be non-negative");
    }
    if (!(ar_coefficient > -1.0 && ar_coefficient < 1.0)) {
        throw DomainError("ar_coefficient must lie in (-1, 1)");
    }
    for (std::size_t r = 0; r < segments; ++r) {
        if (!(std_of(r) > noise_std)) {
            throw DomainError("segment std must exceed noise_std");
        }
        if (!(mean_of(r) > 0.0)) {
            throw DomainError("segment mean speed must be positive");
        }
    }
}

double SynthConfig::mean_of(std::size_t segment) const {
    return mean_kmh.size() == 1 ? mean_kmh.front() : mean_kmh.at(segment);
}

double SynthConfig::std_of(std::size_t segment) const {
    return std_kmh.size() == 1 ? std_kmh.front() : std_kmh.at(segment);
}

namespace {

// Share of the latent signal's variance carried by the daily sinusoid.
double daily_weight(const SynthConfig &config) {
    const double signal = config.std_of(0) * config.std_of(0) - config.noise_std * config.noise_std;
    return std::clamp(config.daily_amplitude * config.daily_amplitude / (2.0 * signal), 0.0, 0.9);
}

std::vector<double> ar1_series(Rng &rng, std::size_t n, double phi) {
    std::vector<double> out(n);
    const double innovation = std::sqrt(1.0 - phi * phi);
    double state = standard_normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) {
            state = phi * state + innovation * standard_normal(rng);
        }
        out[i] = state;
    }
    return out;
}

} // namespace

double SynthConfig::expected_correlation(std::size_t a, std::size_t b) const {
    if (a == b) {
        return 1.0;
    }
    const double w = daily_weight(*this);
    const double shift = static_cast<double>((a > b ? a - b : b - a) * static_cast<std::size_t>(coupling_lag));
    const double latent = w * std::cos(2.0 * std::numbers::pi * shift / static_cast<double>(kBinsPerDay)) +
                          (1.0 - w) * std::pow(ar_coefficient, shift);
    const double noise2 = noise_std * noise_std;
    const double sa = std::sqrt(std_of(a) * std_of(a) - noise2);
    const double sb = std::sqrt(std_of(b) * std_of(b) - noise2);
    return coupling * latent * sa * sb / (std_of(a) * std_of(b));
}

SpeedPanel synthesize_panel(const SynthConfig &config) {
    config.validate();
    std::vector<std::string> ids = config.segment_ids;
    if (ids.empty()) {
        for (std::size_t r = 0; r < config.segments; ++r) {
            ids.push_back("seg" + std::to_string(r));
        }
    }
    const std::size_t n = config.bins;
    const std::size_t max_shift = (config.segments - 1) * static_cast<std::size_t>(config.coupling_lag);
    const double w = daily_weight(config);

    // Latent signal indexed from -max_shift so that every segment can look back.
    Rng latent_rng(mix_seed(config.seed, 0));
    const double phase = uniform(latent_rng, 0.0, 2.0 * std::numbers::pi);
    const auto latent_ar = ar1_series(latent_rng, n + max_shift, config.ar_coefficient);
    std::vector<double> latent(n + max_shift);
    for (std::size_t i = 0; i < latent.size(); ++i) {
        const double t = static_cast<double>(config.start_bin) + static_cast<double>(i) - static_cast<double>(max_shift);
        const double daily = std::sqrt(2.0) * std::sin(2.0 * std::numbers::pi * t / kBinsPerDay + phase);
        latent[i] = std::sqrt(w) * daily + std::sqrt(1.0 - w) * latent_ar[i];
    }

    SpeedPanel panel = SpeedPanel::empty_like(ids, config.start_bin, static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < config.segments; ++r) {
        Rng own_rng(mix_seed(config.seed, 1 + r));
        Rng noise_rng(mix_seed(config.seed, 1000 + r));
        const auto own = ar1_series(own_rng, n, config.ar_coefficient);
        const double target_mean = config.mean_of(r);
        const double target_std = config.std_of(r);
        const double signal = std::sqrt(target_std * target_std - config.noise_std * config.noise_std);
        const std::size_t shift = r * static_cast<std::size_t>(config.coupling_lag);

        std::vector<double> raw(n);
        for (std::size_t t = 0; t < n; ++t) {
            const double z = std::sqrt(config.coupling) * latent[t + max_shift - shift] +
                             std::sqrt(1.0 - config.coupling) * own[t];
            raw[t] = signal * z + config.noise_std * standard_normal(noise_rng);
        }

        // Calibrate speed = max(0, offset + gain * raw) to the configured moments.
        double offset = target_mean;
        double gain = 1.0;
        std::vector<double> speed(n);
        for (int iter = 0; iter < 500; ++iter) {
            double sum = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                speed[t] = std::max(0.0, offset + gain * raw[t]);
                sum += speed[t];
            }
            const double mean = sum / static_cast<double>(n);
            double ss = 0.0;
            for (const double s : speed) {
                ss += (s - mean) * (s - mean);
            }
            const double std = std::sqrt(ss / static_cast<double>(n));
            if (std::abs(mean - target_mean) < 1e-10 * target_mean && std::abs(std - target_std) < 1e-10 * target_std) {
                break;
            }
            offset += target_mean - mean;
            if (std > 0.0) {
                gain *= target_std / std;
            }
        }
        for (std::size_t t = 0; t < n; ++t) {
            panel.speed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = speed[t];
            panel.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = true;
        }
    }
    return panel;
}

} // namespace gpimpute
