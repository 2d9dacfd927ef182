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

#ifndef GPIMPUTE_ERRORS_HPP
#define GPIMPUTE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace gpimpute {

// A hyperparameter, ratio or shape argument is outside its valid domain.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Cholesky factorization failed even after the full jitter ladder.
class ConditioningError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A method cannot be trained from the cells that remain observed.
class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed text input (CSV rows, kernel expressions, mask files, configs).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Well-formed input that violates a data invariant (negative speed, empty panel, zero variance).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Experiment configuration is malformed or inconsistent with its data.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Quadrature oracle did not reach its tolerance.
class OracleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gpimpute

#endif // GPIMPUTE_ERRORS_HPP
