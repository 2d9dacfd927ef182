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

#include "gpimpute/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numbers>

#include "gpimpute/errors.hpp"
#include "text_util.hpp"

namespace gpimpute {

namespace {

void require_positive(double value, const char *what) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw DomainError(std::string("kernel parameter ") + what + " must be positive and finite, got " +
                          detail::format_number(value));
    }
}

// sin(pi |d| / p) after exact reduction of the lag into [0, p/2], so that
// shifting a time by one period leaves the value bit-identical.
double periodic_phase_sine(double lag, double period) {
    double reduced = std::fmod(std::abs(lag), period);
    reduced = std::min(reduced, period - reduced);
    return std::sin(std::numbers::pi * reduced / period);
}

} // namespace

double eval_se(double t, double t_prime, double h, double length) {
    require_positive(h, "h");
    require_positive(length, "l");
    const double lag = t - t_prime;
    return h * h * std::exp(-lag * lag / (2.0 * length * length));
}

double eval_periodic(double t, double t_prime, double h, double length, double period) {
    require_positive(h, "h");
    require_positive(length, "l");
    require_positive(period, "p");
    const double s = periodic_phase_sine(t - t_prime, period);
    return h * h * std::exp(-s * s / (2.0 * length * length));
}

double eval_white_noise(TimeBin t, TimeBin t_prime, double variance) {
    require_positive(variance, "var");
    return t == t_prime ? variance : 0.0;
}

KernelLeaf KernelLeaf::se(double h, double length) {
    require_positive(h, "h");
    require_positive(length, "l");
    return {KernelKind::SquaredExponential, h, length, 0.0};
}

KernelLeaf KernelLeaf::periodic(double h, double length, double period) {
    require_positive(h, "h");
    require_positive(length, "l");
    require_positive(period, "p");
    return {KernelKind::Periodic, h, length, period};
}

KernelLeaf KernelLeaf::white_noise(double variance) {
    require_positive(variance, "var");
    return {KernelKind::WhiteNoise, variance, 0.0, 0.0};
}

std::size_t KernelLeaf::num_params() const {
    switch (kind) {
    case KernelKind::SquaredExponential:
        return 2;
    case KernelKind::Periodic:
        return 3;
    case KernelKind::WhiteNoise:
        return 1;
    }
    return 0;
}

double KernelLeaf::operator()(TimeBin t, TimeBin t_prime) const {
    switch (kind) {
    case KernelKind::SquaredExponential:
        return eval_se(static_cast<double>(t), static_cast<double>(t_prime), scale, length);
    case KernelKind::Periodic:
        return eval_periodic(static_cast<double>(t), static_cast<double>(t_prime), scale, length, period);
    case KernelKind::WhiteNoise:
        return eval_white_noise(t, t_prime, scale);
    }
    return 0.0;
}

KernelSpec::KernelSpec(std::vector<KernelLeaf> leaves) : leaves_(std::move(leaves)) {
    for (const auto &leaf : leaves_) {
        switch (leaf.kind) {
        case KernelKind::Periodic:
            require_positive(leaf.period, "p");
            [[fallthrough]];
        case KernelKind::SquaredExponential:
            require_positive(leaf.scale, "h");
            require_positive(leaf.length, "l");
            break;
        case KernelKind::WhiteNoise:
            require_positive(leaf.scale, "var");
            break;
        }
    }
}

std::size_t KernelSpec::num_params() const {
    std::size_t n = 0;
    for (const auto &leaf : leaves_) {
        n += leaf.num_params();
    }
    return n;
}

Eigen::VectorXd KernelSpec::log_params() const {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(num_params()));
    Eigen::Index i = 0;
    for (const auto &leaf : leaves_) {
        theta(i++) = std::log(leaf.scale);
        if (leaf.kind != KernelKind::WhiteNoise) {
            theta(i++) = std::log(leaf.length);
        }
        if (leaf.kind == KernelKind::Periodic) {
            theta(i++) = std::log(leaf.period);
        }
    }
    return theta;
}

KernelSpec KernelSpec::with_log_params(const Eigen::Ref<const Eigen::VectorXd> &theta) const {
    if (theta.size() != static_cast<Eigen::Index>(num_params())) {
        throw DomainError("log-parameter vector has " + std::to_string(theta.size()) + " entries, spec needs " +
                          std::to_string(num_params()));
    }
    std::vector<KernelLeaf> leaves = leaves_;
    Eigen::Index i = 0;
    for (auto &leaf : leaves) {
        leaf.scale = std::exp(theta(i++));
        if (leaf.kind != KernelKind::WhiteNoise) {
            leaf.length = std::exp(theta(i++));
        }
        if (leaf.kind == KernelKind::Periodic) {
            leaf.period = std::exp(theta(i++));
        }
    }
    return KernelSpec(std::move(leaves));
}

std::vector<std::string> KernelSpec::param_names() const {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < leaves_.size(); ++k) {
        const auto prefix = std::to_string(k) + ".";
        switch (leaves_[k].kind) {
        case KernelKind::SquaredExponential:
            names.push_back(prefix + "SE.log_h");
            names.push_back(prefix + "SE.log_l");
            break;
        case KernelKind::Periodic:
            names.push_back(prefix + "PER.log_h");
            names.push_back(prefix + "PER.log_l");
            names.push_back(prefix + "PER.log_p");
            break;
        case KernelKind::WhiteNoise:
            names.push_back(prefix + "WN.log_var");
            break;
        }
    }
    return names;
}

std::vector<std::size_t> KernelSpec::period_param_indices() const {
    std::vector<std::size_t> indices;
    std::size_t offset = 0;
    for (const auto &leaf : leaves_) {
        if (leaf.kind == KernelKind::Periodic) {
            indices.push_back(offset + 2);
        }
        offset += leaf.num_params();
    }
    return indices;
}

double KernelSpec::noise_variance() const {
    double total = 0.0;
    for (const auto &leaf : leaves_) {
        if (leaf.kind == KernelKind::WhiteNoise) {
            total += leaf.scale;
        }
    }
    return total;
}

KernelSpec KernelSpec::without_white_noise() const {
    std::vector<KernelLeaf> kept;
    for (const auto &leaf : leaves_) {
        if (leaf.kind != KernelKind::WhiteNoise) {
            kept.push_back(leaf);
        }
    }
    return KernelSpec(std::move(kept));
}

bool KernelSpec::has_white_noise() const {
    return std::any_of(leaves_.begin(), leaves_.end(),
                       [](const KernelLeaf &leaf) { return leaf.kind == KernelKind::WhiteNoise; });
}

KernelSpec KernelSpec::operator+(const KernelSpec &other) const {
    std::vector<KernelLeaf> leaves = leaves_;
    leaves.insert(leaves.end(), other.leaves_.begin(), other.leaves_.end());
    return KernelSpec(std::move(leaves));
}

std::string KernelSpec::to_string() const {
    std::string out;
    for (const auto &leaf : leaves_) {
        if (!out.empty()) {
            out += "+";
        }
        switch (leaf.kind) {
        case KernelKind::SquaredExponential:
            out += "SE(h=" + detail::format_number(leaf.scale) + ",l=" + detail::format_number(leaf.length) + ")";
            break;
        case KernelKind::Periodic:
            out += "PER(h=" + detail::format_number(leaf.scale) + ",l=" + detail::format_number(leaf.length) +
                   ",p=" + detail::format_number(leaf.period) + ")";
            break;
        case KernelKind::WhiteNoise:
            out += "WN(var=" + detail::format_number(leaf.scale) + ")";
            break;
        }
    }
    return out;
}

namespace {

class SpecParser {
public:
    explicit SpecParser(std::string_view text) : text_(text) {}

    KernelSpec run() {
        std::vector<KernelLeaf> leaves;
        skip_space();
        if (at_end()) {
            throw ParseError("empty kernel expression");
        }
        while (true) {
            leaves.push_back(term());
            skip_space();
            if (at_end()) {
                break;
            }
            expect('+');
        }
        try {
            return KernelSpec(std::move(leaves));
        } catch (const DomainError &e) {
            throw ParseError(std::string("invalid kernel expression '") + std::string(text_) + "': " + e.what());
        }
    }

private:
    KernelLeaf term() {
        skip_space();
        std::string name;
        while (!at_end() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
            name += text_[pos_++];
        }
        expect('(');
        std::map<std::string, double> args;
        while (true) {
            skip_space();
            std::string key;
            while (!at_end() && std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
                key += text_[pos_++];
            }
            expect('=');
            const auto start = pos_;
            while (!at_end() && text_[pos_] != ',' && text_[pos_] != ')') {
                ++pos_;
            }
            const auto value = detail::parse_double(text_.substr(start, pos_ - start));
            if (!value) {
                fail("bad number for '" + key + "'");
            }
            if (!args.emplace(key, *value).second) {
                fail("duplicate argument '" + key + "'");
            }
            skip_space();
            if (!at_end() && text_[pos_] == ',') {
                ++pos_;
                continue;
            }
            expect(')');
            break;
        }
        const auto take = [&](const char *key) {
            const auto it = args.find(key);
            if (it == args.end()) {
                fail(name + " is missing argument '" + key + "'");
            }
            const double v = it->second;
            args.erase(it);
            return v;
        };
        KernelLeaf leaf;
        if (name == "SE") {
            leaf = {KernelKind::SquaredExponential, take("h"), take("l"), 0.0};
        } else if (name == "PER") {
            leaf = {KernelKind::Periodic, take("h"), take("l"), take("p")};
        } else if (name == "WN") {
            leaf = {KernelKind::WhiteNoise, take("var"), 0.0, 0.0};
        } else {
            fail("unknown kernel '" + name + "'");
        }
        if (!args.empty()) {
            fail(name + " got unexpected argument '" + args.begin()->first + "'");
        }
        return leaf;
    }

    void expect(char c) {
        skip_space();
        if (at_end() || text_[pos_] != c) {
            fail(std::string("expected '") + c + "'");
        }
        ++pos_;
    }

    void skip_space() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool at_end() const { return pos_ >= text_.size(); }

    [[noreturn]] void fail(const std::string &msg) const {
        throw ParseError("kernel expression '" + std::string(text_) + "' at offset " + std::to_string(pos_) + ": " +
                         msg);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace

KernelSpec KernelSpec::parse(std::string_view text) {
    return SpecParser(text).run();
}

double eval_spec(const KernelSpec &spec, TimeBin t, TimeBin t_prime) {
    if (spec.empty()) {
        throw DomainError("cannot evaluate an empty kernel spec");
    }
    double total = 0.0;
    for (const auto &leaf : spec.leaves()) {
        total += leaf(t, t_prime);
    }
    return total;
}

Eigen::MatrixXd cross_gram(const KernelSpec &spec, std::span<const TimeBin> rows, std::span<const TimeBin> cols) {
    if (spec.empty()) {
        throw DomainError("cannot evaluate an empty kernel spec");
    }
    Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = eval_spec(spec, rows[i], cols[j]);
        }
    }
    return k;
}

Eigen::MatrixXd gram(const KernelSpec &spec, std::span<const TimeBin> times) {
    if (times.empty()) {
        throw DomainError("gram matrix needs at least one time");
    }
    if (spec.empty()) {
        throw DomainError("cannot evaluate an empty kernel spec");
    }
    const auto n = static_cast<Eigen::Index>(times.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = eval_spec(spec, times[static_cast<std::size_t>(i)], times[static_cast<std::size_t>(j)]);
            k(j, i) = k(i, j);
        }
    }
    return k;
}

std::vector<Eigen::MatrixXd> gram_gradients(const KernelSpec &spec, std::span<const TimeBin> times) {
    if (times.empty()) {
        throw DomainError("gram matrix needs at least one time");
    }
    if (spec.empty()) {
        throw DomainError("cannot evaluate an empty kernel spec");
    }
    const auto n = static_cast<Eigen::Index>(times.size());
    std::vector<Eigen::MatrixXd> grads;
    grads.reserve(spec.num_params());
    for (const auto &leaf : spec.leaves()) {
        const auto first = grads.size();
        for (std::size_t p = 0; p < leaf.num_params(); ++p) {
            grads.emplace_back(Eigen::MatrixXd::Zero(n, n));
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j <= i; ++j) {
                const TimeBin ti = times[static_cast<std::size_t>(i)];
                const TimeBin tj = times[static_cast<std::size_t>(j)];
                const double k = leaf(ti, tj);
                const double lag = static_cast<double>(ti - tj);
                switch (leaf.kind) {
                case KernelKind::SquaredExponential: {
                    const double l2 = leaf.length * leaf.length;
                    grads[first](i, j) = 2.0 * k;
                    grads[first + 1](i, j) = k * lag * lag / l2;
                    break;
                }
                case KernelKind::Periodic: {
                    const double l2 = leaf.length * leaf.length;
                    const double s = periodic_phase_sine(lag, leaf.period);
                    const double arg = std::numbers::pi * std::abs(lag) / leaf.period;
                    grads[first](i, j) = 2.0 * k;
                    grads[first + 1](i, j) = k * s * s / l2;
                    // d(sin^2(arg))/dlog p = -sin(2 arg) * arg
                    grads[first + 2](i, j) = k * std::sin(2.0 * arg) * arg / (2.0 * l2);
                    break;
                }
                case KernelKind::WhiteNoise:
                    grads[first](i, j) = k;
                    break;
                }
                for (std::size_t p = 0; p < leaf.num_params(); ++p) {
                    grads[first + p](j, i) = grads[first + p](i, j);
                }
            }
        }
    }
    return grads;
}

KernelSpec default_temporal_spec() {
    return KernelSpec({KernelLeaf::se(1.0, 12.0), KernelLeaf::periodic(0.5, 1.0, 288.0),
                       KernelLeaf::white_noise(0.1)});
}

} // namespace gpimpute
