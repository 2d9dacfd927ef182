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

#include "gpimpute/missingness.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "gpimpute/errors.hpp"
#include "gpimpute/random.hpp"
#include "text_util.hpp"

namespace gpimpute {

void FSMConfig::validate() const {
    if (!(p_mo >= 0.0 && p_mo <= 1.0) || !(p_mm >= 0.0 && p_mm <= 1.0)) {
        throw DomainError("FSM probabilities must lie in [0, 1]");
    }
}

std::string MaskProvenance::to_string() const {
    if (kind == MaskKind::MCAR) {
        return "kind=MCAR ratio=" + detail::format_number(ratio) + " seed=" + std::to_string(seed);
    }
    return "kind=FSM p_mo=" + detail::format_number(p_mo) + " p_mm=" + detail::format_number(p_mm) +
           " seed=" + std::to_string(seed);
}

MissingMask mcar_mask(std::size_t rows, std::size_t cols, double ratio, std::uint64_t seed) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) {
        throw DomainError("MCAR ratio must lie in [0, 1], got " + detail::format_number(ratio));
    }
    const std::size_t total = rows * cols;
    // The small slack keeps e.g. 0.29 * 100 from flooring to 28.
    const auto count = std::min(total, static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total) + 1e-9)));

    MissingMask mask{BoolArray::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), false),
                     {MaskKind::MCAR, ratio, 0.0, 0.0, seed}};
    std::vector<std::size_t> order(total);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(mix_seed(seed, 0x6d636172));
    // Partial Fisher-Yates: the first `count` entries are a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        const auto j = i + static_cast<std::size_t>(uniform_index(rng, total - i));
        std::swap(order[i], order[j]);
        const auto cell = order[i];
        mask.missing(static_cast<Eigen::Index>(cell / cols), static_cast<Eigen::Index>(cell % cols)) = true;
    }
    return mask;
}

MissingMask fsm_mask(std::size_t rows, std::size_t cols, const FSMConfig &config) {
    config.validate();
    MissingMask mask{BoolArray::Constant(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), false),
                     {MaskKind::FSM, 0.0, config.p_mo, config.p_mm, config.seed}};
    for (std::size_t r = 0; r < rows; ++r) {
        Rng rng(mix_seed(config.seed, r));
        bool missing = false;
        for (std::size_t t = 0; t < cols; ++t) {
            if (t > 0) {
                const double u = uniform01(rng);
                missing = missing ? (u < config.p_mm) : (u < config.p_mo);
            }
            mask.missing(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(t)) = missing;
        }
    }
    return mask;
}

MissingMask regenerate_mask(const MaskProvenance &provenance, std::size_t rows, std::size_t cols) {
    if (provenance.kind == MaskKind::MCAR) {
        return mcar_mask(rows, cols, provenance.ratio, provenance.seed);
    }
    return fsm_mask(rows, cols, {provenance.p_mo, provenance.p_mm, provenance.seed});
}

double stationary_missing_rate(const FSMConfig &config) {
    config.validate();
    const double denominator = config.p_mo + 1.0 - config.p_mm;
    if (!(denominator > 0.0)) {
        throw DomainError("FSM chain with p_mo = 0 and p_mm = 1 has no stationary distribution");
    }
    return config.p_mo / denominator;
}

MaskedPanel apply_mask(const SpeedPanel &panel, const MissingMask &mask) {
    if (mask.rows() != panel.num_segments() || mask.cols() != panel.num_bins()) {
        throw DomainError("mask shape " + std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()) +
                          " does not match panel " + std::to_string(panel.num_segments()) + "x" +
                          std::to_string(panel.num_bins()));
    }
    MaskedPanel out{panel, {}};
    for (Eigen::Index r = 0; r < panel.num_segments(); ++r) {
        for (Eigen::Index t = 0; t < panel.num_bins(); ++t) {
            if (mask.missing(r, t) && panel.observed(r, t)) {
                out.held_out.push_back({{static_cast<std::size_t>(r), static_cast<TimeBin>(t)}, panel.speed(r, t)});
                out.panel.observed(r, t) = false;
                out.panel.speed(r, t) = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return out;
}

void write_mask(std::ostream &out, const MissingMask &mask) {
    out << "# mask " << mask.provenance.to_string() << " rows=" << mask.rows() << " cols=" << mask.cols() << '\n';
    std::string line(static_cast<std::size_t>(mask.cols()), '0');
    for (Eigen::Index r = 0; r < mask.rows(); ++r) {
        for (Eigen::Index t = 0; t < mask.cols(); ++t) {
            line[static_cast<std::size_t>(t)] = mask.missing(r, t) ? '1' : '0';
        }
        out << line << '\n';
    }
}

MissingMask read_mask(std::istream &in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("mask file is empty", 1);
    }
    std::istringstream fields(header);
    std::string hash, word;
    fields >> hash >> word;
    if (hash != "#" || word != "mask") {
        throw ParseError("expected '# mask ...' provenance header", 1);
    }
    std::map<std::string, std::string> kv;
    std::string token;
    while (fields >> token) {
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            throw ParseError("bad header field '" + token + "'", 1);
        }
        kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
    const auto need = [&](const std::string &key) {
        const auto it = kv.find(key);
        if (it == kv.end()) {
            throw ParseError("mask header is missing '" + key + "'", 1);
        }
        return it->second;
    };
    const auto number = [&](const std::string &key) {
        const auto v = detail::parse_double(need(key));
        if (!v) {
            throw ParseError("bad number for '" + key + "'", 1);
        }
        return *v;
    };
    MaskProvenance provenance;
    const auto kind = need("kind");
    if (kind == "MCAR") {
        provenance.kind = MaskKind::MCAR;
        provenance.ratio = number("ratio");
    } else if (kind == "FSM") {
        provenance.kind = MaskKind::FSM;
        provenance.p_mo = number("p_mo");
        provenance.p_mm = number("p_mm");
    } else {
        throw ParseError("unknown mask kind '" + kind + "'", 1);
    }
    try {
        provenance.seed = std::stoull(need("seed"));
    } catch (const std::logic_error &) {
        throw ParseError("bad seed", 1);
    }
    const auto rows = static_cast<Eigen::Index>(number("rows"));
    const auto cols = static_cast<Eigen::Index>(number("cols"));
    if (rows < 0 || cols < 0) {
        throw ParseError("negative mask shape", 1);
    }
    MissingMask mask{BoolArray::Constant(rows, cols, false), provenance};
    std::string line;
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (!std::getline(in, line)) {
            throw ParseError("mask has fewer rows than its header declares", static_cast<std::size_t>(r) + 2);
        }
        const auto row = detail::trim(line);
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError("mask row has " + std::to_string(row.size()) + " columns, expected " +
                                 std::to_string(cols),
                             static_cast<std::size_t>(r) + 2);
        }
        for (Eigen::Index t = 0; t < cols; ++t) {
            const char c = row[static_cast<std::size_t>(t)];
            if (c != '0' && c != '1') {
                throw ParseError("mask cells must be '0' or '1'", static_cast<std::size_t>(r) + 2);
            }
            mask.missing(r, t) = c == '1';
        }
    }
    return mask;
}

void save_mask(const std::string &path, const MissingMask &mask) {
    std::ofstream out(path);
    if (!out) {
        throw ValidationError("cannot write mask file '" + path + "'");
    }
    write_mask(out, mask);
}

MissingMask load_mask(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open mask file '" + path + "'");
    }
    return read_mask(in);
}

} // namespace gpimpute
