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

#ifndef GPIMPUTE_CELL_HPP
#define GPIMPUTE_CELL_HPP

#include <compare>
#include <cstddef>
#include <cstdint>

namespace gpimpute {

// Index of a 5-minute bin (epoch seconds / 300 for loaded data).
using TimeBin = std::int64_t;

// One (segment, time-bin) position of a panel. Ordering is the canonical
// segment-major layout: segment ascending, then time ascending.
struct Cell {
    std::size_t segment = 0;
    TimeBin bin = 0;

    auto operator<=>(const Cell &) const = default;
};

struct CellValue {
    Cell cell;
    double value = 0.0;
};

// An imputed cell; `fallback` marks values produced by a method's documented
// fallback (segment mean, prior mean) rather than the method itself.
struct Imputation {
    Cell cell;
    double value = 0.0;
    bool fallback = false;
};

} // namespace gpimpute

#endif // GPIMPUTE_CELL_HPP
