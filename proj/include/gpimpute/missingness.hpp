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

#ifndef GPIMPUTE_MISSINGNESS_HPP
#define GPIMPUTE_MISSINGNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpimpute/panel.hpp"

namespace gpimpute {

enum class MaskKind { MCAR, FSM };

// Two-state burst generator: p_mo = p(missing | observed), p_mm = p(missing | missing).
struct FSMConfig {
    double p_mo = 0.25;
    double p_mm = 0.75;
    std::uint64_t seed = 0;

    void validate() const;
};

struct MaskProvenance {
    MaskKind kind = MaskKind::MCAR;
    double ratio = 0.0; // MCAR only
    double p_mo = 0.0;  // FSM only
    double p_mm = 0.0;  // FSM only
    std::uint64_t seed = 0;

    std::string to_string() const;
};

// true = missing.
struct MissingMask {
    BoolArray missing;
    MaskProvenance provenance;

    Eigen::Index rows() const { return missing.rows(); }
    Eigen::Index cols() const { return missing.cols(); }
    std::size_t count() const { return static_cast<std::size_t>(missing.count()); }
};

// Exactly floor(ratio * rows * cols) cells, uniformly without replacement.
// For a fixed seed, masks at increasing ratios are nested.
MissingMask mcar_mask(std::size_t rows, std::size_t cols, double ratio, std::uint64_t seed);

// Independent chain per row, starting in the observed state at column 0.
MissingMask fsm_mask(std::size_t rows, std::size_t cols, const FSMConfig &config);

// Rebuilds a mask from its provenance record.
MissingMask regenerate_mask(const MaskProvenance &provenance, std::size_t rows, std::size_t cols);

// p_mo / (p_mo + 1 - p_mm); throws DomainError for a chain with no transitions.
double stationary_missing_rate(const FSMConfig &config);

struct MaskedPanel {
    SpeedPanel panel;
    // Cells that were observed in the source and are hidden by the mask.
    std::vector<CellValue> held_out;
};

MaskedPanel apply_mask(const SpeedPanel &panel, const MissingMask &mask);

/*
 * Text grid: one provenance header line
 *   # mask kind=MCAR ratio=0.5 seed=7 rows=3 cols=2016
 * followed by one line of '0'/'1' characters per segment ('1' = missing).
 */
void write_mask(std::ostream &out, const MissingMask &mask);
MissingMask read_mask(std::istream &in);
void save_mask(const std::string &path, const MissingMask &mask);
MissingMask load_mask(const std::string &path);

} // namespace gpimpute

#endif // GPIMPUTE_MISSINGNESS_HPP
