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

#include "gpimpute/mogp.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gpimpute/errors.hpp"
#include "text_util.hpp"

namespace gpimpute {

void ConvKernelParams::validate() const {
    if (amplitude.rows() != precision.rows() || amplitude.cols() != precision.cols()) {
        throw DomainError("amplitude and precision matrices must have the same shape");
    }
    if (amplitude.rows() < 1 || amplitude.cols() < 1) {
        throw DomainError("convolution kernels need at least one output and one latent function");
    }
    if (!amplitude.allFinite()) {
        throw DomainError("convolution amplitudes must be finite");
    }
    if (!precision.allFinite() || (precision.array() <= 0.0).any()) {
        throw DomainError("convolution precisions must be positive and finite");
    }
}

namespace {

void check_indices(const ConvKernelParams &params, Eigen::Index r, Eigen::Index h) {
    if (r < 0 || h < 0 || r >= params.num_outputs() || h >= params.num_outputs()) {
        throw DomainError("output index out of range");
    }
}

// sqrt(2 pi / (a + b)) exp(-1/2 ab/(a+b) lag^2): the integral of two unit-amplitude Gaussian smoothing kernels.
double smoothing_overlap(double a, double b, double lag) {
    const double sum = a + b;
    return std::sqrt(2.0 * std::numbers::pi / sum) * std::exp(-0.5 * (a * b / sum) * lag * lag);
}

} // namespace

double cross_cov_s(const ConvKernelParams &params, Eigen::Index r, Eigen::Index h, double lag) {
    params.validate();
    check_indices(params, r, h);
    double total = 0.0;
    for (Eigen::Index q = 0; q < params.num_latents(); ++q) {
        total += params.amplitude(r, q) * params.amplitude(h, q) *
                 smoothing_overlap(params.precision(r, q), params.precision(h, q), lag);
    }
    return total;
}

double quadrature_cross_cov(const ConvKernelParams &params, Eigen::Index r, Eigen::Index h, double lag) {
    params.validate();
    check_indices(params, r, h);
    using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
    double total = 0.0;
    for (Eigen::Index q = 0; q < params.num_latents(); ++q) {
        const double vr = params.amplitude(r, q);
        const double vh = params.amplitude(h, q);
        if (vr == 0.0 || vh == 0.0) {
            continue;
        }
        const double ar = params.precision(r, q);
        const double ah = params.precision(h, q);
        // t = lag, t' = 0: integrand k_rq(lag - z) k_hq(-z)
        const auto integrand = [&](double z) {
            const double dr = lag - z;
            return vr * std::exp(-0.5 * ar * dr * dr) * vh * std::exp(-0.5 * ah * z * z);
        };
        const double reach = 40.0 / std::sqrt(std::min(ar, ah));
        const double lo = std::min(lag, 0.0) - reach;
        const double hi = std::max(lag, 0.0) + reach;
        double error = 0.0;
        const double value = Integrator::integrate(integrand, lo, hi, 20, 1e-14, &error);
        if (!(error <= 1e-9) || !std::isfinite(value)) {
            throw OracleError("cross-covariance quadrature did not converge (error estimate " +
                              detail::format_number(error) + ")");
        }
        total += value;
    }
    return total;
}

void MOGPSpec::validate() const {
    const std::size_t r = segment_ids.size();
    if (r == 0) {
        throw DomainError("MOGP spec needs at least one segment");
    }
    conv.validate();
    if (static_cast<std::size_t>(conv.num_outputs()) != r) {
        throw DomainError("convolution kernels have " + std::to_string(conv.num_outputs()) + " outputs for " +
                          std::to_string(r) + " segments");
    }
    if (temporal.size() != r || noise.size() != r) {
        throw DomainError("every segment needs a temporal spec and a noise variance");
    }
    for (std::size_t i = 0; i < r; ++i) {
        if (temporal[i].empty()) {
            throw DomainError("segment '" + segment_ids[i] + "' has an empty temporal spec");
        }
        if (temporal[i].has_white_noise()) {
            throw DomainError("segment '" + segment_ids[i] + "' temporal spec must not contain WN; use noise");
        }
        if (!(noise[i] > 0.0) || !std::isfinite(noise[i])) {
            throw DomainError("segment '" + segment_ids[i] + "' noise variance must be positive");
        }
        if (segment_ids[i].empty() || segment_ids[i].find_first_of(" \t\r\n") != std::string::npos) {
            throw DomainError("segment ids must be non-empty and contain no whitespace");
        }
    }
}

std::size_t MOGPSpec::num_params() const {
    std::size_t n = 2 * static_cast<std::size_t>(conv.amplitude.size()) + noise.size();
    for (const auto &t : temporal) {
        n += t.num_params();
    }
    return n;
}

Eigen::VectorXd MOGPSpec::params() const {
    Eigen::VectorXd x(static_cast<Eigen::Index>(num_params()));
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < conv.num_outputs(); ++r) {
        for (Eigen::Index q = 0; q < conv.num_latents(); ++q) {
            x(i++) = conv.amplitude(r, q);
        }
    }
    for (Eigen::Index r = 0; r < conv.num_outputs(); ++r) {
        for (Eigen::Index q = 0; q < conv.num_latents(); ++q) {
            x(i++) = std::log(conv.precision(r, q));
        }
    }
    for (const auto &t : temporal) {
        const Eigen::VectorXd theta = t.log_params();
        x.segment(i, theta.size()) = theta;
        i += theta.size();
    }
    for (const double n : noise) {
        x(i++) = std::log(n);
    }
    return x;
}

MOGPSpec MOGPSpec::with_params(const Eigen::Ref<const Eigen::VectorXd> &x) const {
    if (x.size() != static_cast<Eigen::Index>(num_params())) {
        throw DomainError("parameter vector has " + std::to_string(x.size()) + " entries, spec needs " +
                          std::to_string(num_params()));
    }
    MOGPSpec out = *this;
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < conv.num_outputs(); ++r) {
        for (Eigen::Index q = 0; q < conv.num_latents(); ++q) {
            out.conv.amplitude(r, q) = x(i++);
        }
    }
    for (Eigen::Index r = 0; r < conv.num_outputs(); ++r) {
        for (Eigen::Index q = 0; q < conv.num_latents(); ++q) {
            out.conv.precision(r, q) = std::exp(x(i++));
        }
    }
    for (auto &t : out.temporal) {
        const auto n = static_cast<Eigen::Index>(t.num_params());
        t = t.with_log_params(x.segment(i, n));
        i += n;
    }
    for (auto &n : out.noise) {
        n = std::exp(x(i++));
    }
    out.validate();
    return out;
}

std::vector<std::size_t> MOGPSpec::period_param_indices() const {
    std::vector<std::size_t> out;
    std::size_t offset = 2 * static_cast<std::size_t>(conv.amplitude.size());
    for (const auto &t : temporal) {
        for (const auto i : t.period_param_indices()) {
            out.push_back(offset + i);
        }
        offset += t.num_params();
    }
    return out;
}

std::string MOGPSpec::to_string() const {
    validate();
    std::ostringstream out;
    out << "mogp-spec 1\n";
    out << "segments";
    for (const auto &id : segment_ids) {
        out << ' ' << id;
    }
    out << "\nlatents " << num_latents() << '\n';
    for (std::size_t r = 0; r < num_outputs(); ++r) {
        for (Eigen::Index q = 0; q < num_latents(); ++q) {
            const auto row = static_cast<Eigen::Index>(r);
            out << "conv " << segment_ids[r] << ' ' << q << " v=" << detail::format_number(conv.amplitude(row, q))
                << " A=" << detail::format_number(conv.precision(row, q)) << '\n';
        }
    }
    for (std::size_t r = 0; r < num_outputs(); ++r) {
        out << "temporal " << segment_ids[r] << ' ' << temporal[r].to_string() << '\n';
    }
    for (std::size_t r = 0; r < num_outputs(); ++r) {
        out << "noise " << segment_ids[r] << ' ' << detail::format_number(noise[r]) << '\n';
    }
    return out.str();
}

MOGPSpec MOGPSpec::parse(std::string_view text) {
    MOGPSpec spec;
    std::map<std::string, std::size_t> index;
    Eigen::Index latents = -1;
    std::vector<std::vector<bool>> conv_seen;
    std::vector<bool> temporal_seen, noise_seen;
    std::size_t line_no = 0;
    bool header = false;

    const auto segment_of = [&](const std::string &id, std::size_t line) {
        const auto it = index.find(id);
        if (it == index.end()) {
            throw ParseError("unknown segment '" + id + "'", line);
        }
        return it->second;
    };

    for (const auto raw : detail::split(text, '\n')) {
        ++line_no;
        const auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        std::istringstream in{std::string(line)};
        std::string keyword;
        in >> keyword;
        if (!header) {
            std::string version;
            in >> version;
            if (keyword != "mogp-spec" || version != "1") {
                throw ParseError("expected header 'mogp-spec 1'", line_no);
            }
            header = true;
            continue;
        }
        if (keyword == "segments") {
            std::string id;
            while (in >> id) {
                if (!index.emplace(id, spec.segment_ids.size()).second) {
                    throw ParseError("duplicate segment '" + id + "'", line_no);
                }
                spec.segment_ids.push_back(id);
            }
            if (spec.segment_ids.empty()) {
                throw ParseError("no segments listed", line_no);
            }
            spec.temporal.resize(spec.segment_ids.size());
            spec.noise.assign(spec.segment_ids.size(), 0.0);
            temporal_seen.assign(spec.segment_ids.size(), false);
            noise_seen.assign(spec.segment_ids.size(), false);
        } else if (keyword == "latents") {
            if (spec.segment_ids.empty() || !(in >> latents) || latents < 1) {
                throw ParseError("'latents' needs a positive count after 'segments'", line_no);
            }
            const auto r = static_cast<Eigen::Index>(spec.segment_ids.size());
            spec.conv.amplitude = Eigen::MatrixXd::Zero(r, latents);
            spec.conv.precision = Eigen::MatrixXd::Ones(r, latents);
            conv_seen.assign(spec.segment_ids.size(), std::vector<bool>(static_cast<std::size_t>(latents), false));
        } else if (keyword == "conv") {
            if (latents < 1) {
                throw ParseError("'conv' before 'latents'", line_no);
            }
            std::string id, v_field, a_field;
            Eigen::Index q = -1;
            if (!(in >> id >> q >> v_field >> a_field) || q < 0 || q >= latents) {
                throw ParseError("expected 'conv <segment> <q> v=<amp> A=<precision>'", line_no);
            }
            const auto r = segment_of(id, line_no);
            const auto v = v_field.rfind("v=", 0) == 0 ? detail::parse_double(v_field.substr(2)) : std::nullopt;
            const auto a = a_field.rfind("A=", 0) == 0 ? detail::parse_double(a_field.substr(2)) : std::nullopt;
            if (!v || !a) {
                throw ParseError("bad conv numbers", line_no);
            }
            spec.conv.amplitude(static_cast<Eigen::Index>(r), q) = *v;
            spec.conv.precision(static_cast<Eigen::Index>(r), q) = *a;
            conv_seen[r][static_cast<std::size_t>(q)] = true;
        } else if (keyword == "temporal") {
            std::string id;
            in >> id;
            const auto r = segment_of(id, line_no);
            std::string rest;
            std::getline(in, rest);
            spec.temporal[r] = KernelSpec::parse(rest);
            temporal_seen[r] = true;
        } else if (keyword == "noise") {
            std::string id, value;
            in >> id >> value;
            const auto r = segment_of(id, line_no);
            const auto v = detail::parse_double(value);
            if (!v) {
                throw ParseError("bad noise value", line_no);
            }
            spec.noise[r] = *v;
            noise_seen[r] = true;
        } else {
            throw ParseError("unknown keyword '" + keyword + "'", line_no);
        }
    }
    if (!header || latents < 1) {
        throw ParseError("incomplete MOGP spec document");
    }
    for (std::size_t r = 0; r < spec.segment_ids.size(); ++r) {
        const bool all_conv = std::all_of(conv_seen[r].begin(), conv_seen[r].end(), [](bool b) { return b; });
        if (!all_conv || !temporal_seen[r] || !noise_seen[r]) {
            throw ParseError("segment '" + spec.segment_ids[r] + "' is missing conv, temporal or noise entries");
        }
    }
    try {
        spec.validate();
    } catch (const DomainError &e) {
        throw ParseError(e.what());
    }
    return spec;
}

namespace {

void check_layout(const MOGPSpec &spec, std::span<const Cell> cells) {
    for (const auto &c : cells) {
        if (c.segment >= spec.num_outputs()) {
            throw DomainError("cell refers to segment " + std::to_string(c.segment) + " but spec has " +
                              std::to_string(spec.num_outputs()));
        }
    }
}

double noise_free_entry(const MOGPSpec &spec, const Cell &a, const Cell &b) {
    const auto r = static_cast<Eigen::Index>(a.segment);
    const auto h = static_cast<Eigen::Index>(b.segment);
    const double lag = static_cast<double>(a.bin - b.bin);
    double value = 0.0;
    for (Eigen::Index q = 0; q < spec.conv.num_latents(); ++q) {
        value += spec.conv.amplitude(r, q) * spec.conv.amplitude(h, q) *
                 smoothing_overlap(spec.conv.precision(r, q), spec.conv.precision(h, q), lag);
    }
    if (a.segment == b.segment) {
        value += eval_spec(spec.temporal[a.segment], a.bin, b.bin);
    }
    return value;
}

/*
 * Calls sink(param, i, j, dV_ij) for i >= j. Several calls may target the same
 * (param, i, j); sinks accumulate.
 */
template <class Sink>
void visit_gradients(const MOGPSpec &spec, std::span<const Cell> layout, Sink &&sink) {
    const Eigen::Index outputs = spec.conv.num_outputs();
    const Eigen::Index latents = spec.conv.num_latents();
    const std::size_t precision_offset = static_cast<std::size_t>(outputs * latents);
    const auto amp_index = [&](Eigen::Index r, Eigen::Index q) { return static_cast<std::size_t>(r * latents + q); };
    const auto n = static_cast<Eigen::Index>(layout.size());

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(layout[static_cast<std::size_t>(i)].segment);
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto h = static_cast<Eigen::Index>(layout[static_cast<std::size_t>(j)].segment);
            const double lag =
                static_cast<double>(layout[static_cast<std::size_t>(i)].bin - layout[static_cast<std::size_t>(j)].bin);
            for (Eigen::Index q = 0; q < latents; ++q) {
                const double a = spec.conv.precision(r, q);
                const double b = spec.conv.precision(h, q);
                const double vr = spec.conv.amplitude(r, q);
                const double vh = spec.conv.amplitude(h, q);
                const double overlap = smoothing_overlap(a, b, lag);
                const double term = vr * vh * overlap;
                const double sum = a + b;
                sink(amp_index(r, q), i, j, vh * overlap);
                sink(amp_index(h, q), i, j, vr * overlap);
                sink(precision_offset + amp_index(r, q), i, j,
                     a * term * (-0.5 / sum - 0.5 * lag * lag * b * b / (sum * sum)));
                sink(precision_offset + amp_index(h, q), i, j,
                     b * term * (-0.5 / sum - 0.5 * lag * lag * a * a / (sum * sum)));
            }
        }
    }

    std::size_t offset = 2 * precision_offset;
    for (std::size_t seg = 0; seg < spec.num_outputs(); ++seg) {
        std::vector<Eigen::Index> members;
        std::vector<TimeBin> times;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (layout[static_cast<std::size_t>(i)].segment == seg) {
                members.push_back(i);
                times.push_back(layout[static_cast<std::size_t>(i)].bin);
            }
        }
        const auto &temporal = spec.temporal[seg];
        if (!members.empty()) {
            const auto grads = gram_gradients(temporal, times);
            for (std::size_t p = 0; p < grads.size(); ++p) {
                for (std::size_t a = 0; a < members.size(); ++a) {
                    for (std::size_t b = 0; b <= a; ++b) {
                        sink(offset + p, members[a], members[b],
                             grads[p](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
                    }
                }
            }
        }
        offset += temporal.num_params();
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto seg = layout[static_cast<std::size_t>(i)].segment;
        sink(offset + seg, i, i, spec.noise[seg]);
    }
}

} // namespace

Eigen::MatrixXd cross_cov(const MOGPSpec &spec, std::span<const Cell> rows, std::span<const Cell> cols) {
    spec.validate();
    check_layout(spec, rows);
    check_layout(spec, cols);
    Eigen::MatrixXd k(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = noise_free_entry(spec, rows[i], cols[j]);
        }
    }
    return k;
}

Eigen::MatrixXd full_cov(const MOGPSpec &spec, std::span<const Cell> layout) {
    spec.validate();
    check_layout(spec, layout);
    const auto n = static_cast<Eigen::Index>(layout.size());
    Eigen::MatrixXd v(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto &a = layout[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j <= i; ++j) {
            const auto &b = layout[static_cast<std::size_t>(j)];
            double value = noise_free_entry(spec, a, b);
            if (a == b) {
                value += spec.noise[a.segment];
            }
            v(i, j) = value;
            v(j, i) = value;
        }
    }
    return v;
}

std::vector<Eigen::MatrixXd> full_cov_gradients(const MOGPSpec &spec, std::span<const Cell> layout) {
    spec.validate();
    check_layout(spec, layout);
    const auto n = static_cast<Eigen::Index>(layout.size());
    std::vector<Eigen::MatrixXd> grads(spec.num_params(), Eigen::MatrixXd::Zero(n, n));
    visit_gradients(spec, layout, [&](std::size_t p, Eigen::Index i, Eigen::Index j, double value) {
        grads[p](i, j) += value;
    });
    for (auto &g : grads) {
        g.triangularView<Eigen::StrictlyUpper>() = g.transpose().triangularView<Eigen::StrictlyUpper>();
    }
    return grads;
}

namespace {

std::vector<CellValue> canonical(std::vector<CellValue> observations) {
    std::stable_sort(observations.begin(), observations.end(),
                     [](const CellValue &a, const CellValue &b) { return a.cell < b.cell; });
    for (std::size_t i = 1; i < observations.size(); ++i) {
        if (observations[i].cell == observations[i - 1].cell) {
            throw DomainError("duplicate observation at segment " + std::to_string(observations[i].cell.segment) +
                              ", bin " + std::to_string(observations[i].cell.bin));
        }
    }
    return observations;
}

std::vector<Cell> cells_of(const std::vector<CellValue> &observations) {
    std::vector<Cell> out;
    out.reserve(observations.size());
    for (const auto &o : observations) {
        out.push_back(o.cell);
    }
    return out;
}

Eigen::VectorXd values_of(const std::vector<CellValue> &observations) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(observations.size()));
    for (std::size_t i = 0; i < observations.size(); ++i) {
        out(static_cast<Eigen::Index>(i)) = observations[i].value;
        if (!std::isfinite(observations[i].value)) {
            throw DomainError("observation values must be finite");
        }
    }
    return out;
}

std::vector<CellValue> checked_nonempty(std::vector<CellValue> observations) {
    if (observations.empty()) {
        throw DomainError("cannot fit a multi-output GP without observed cells");
    }
    return canonical(std::move(observations));
}

} // namespace

MOGPModel::MOGPModel(MOGPSpec spec, std::vector<CellValue> observations) : spec_(std::move(spec)) {
    const auto sorted = checked_nonempty(std::move(observations));
    layout_ = cells_of(sorted);
    values_ = values_of(sorted);
    covariance_ = full_cov(spec_, layout_);
    factor_ = JitteredCholesky(covariance_);
    alpha_ = factor_.solve(values_);
}

double MOGPModel::log_marginal_likelihood() const {
    return gaussian_log_density(factor_, values_, alpha_);
}

Eigen::VectorXd MOGPModel::log_marginal_likelihood_gradient() const {
    const Eigen::MatrixXd weight = alpha_ * alpha_.transpose() - factor_.inverse();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec_.num_params()));
    visit_gradients(spec_, layout_, [&](std::size_t p, Eigen::Index i, Eigen::Index j, double value) {
        grad(static_cast<Eigen::Index>(p)) += (i == j ? 1.0 : 2.0) * weight(i, j) * value;
    });
    return 0.5 * grad;
}

JointPosterior MOGPModel::predict(std::span<const Cell> targets) const {
    if (targets.empty()) {
        throw DomainError("mogp prediction needs at least one target");
    }
    JointPosterior out;
    out.targets.assign(targets.begin(), targets.end());
    const Eigen::MatrixXd k_star = cross_cov(spec_, layout_, targets);
    out.mean = k_star.transpose() * alpha_;
    const Eigen::MatrixXd v = factor_.solve_lower(k_star);
    out.covariance = cross_cov(spec_, targets, targets) - v.transpose() * v;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        for (std::size_t j = 0; j < targets.size(); ++j) {
            if (targets[i] == targets[j]) {
                out.covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    spec_.noise[targets[i].segment];
            }
        }
    }
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
    return out;
}

MOGPSpec mogp_optimize(const std::vector<CellValue> &observations, const MOGPSpec &init,
                       const OptimizerConfig &config) {
    init.validate();
    if (observations.size() < 2) {
        throw InsufficientDataError("multi-output optimization needs at least 2 observed cells");
    }
    if (config.max_iters <= 0) {
        return init;
    }
    const auto sorted = canonical(observations);
    const Objective objective = [&](const Eigen::VectorXd &x, Eigen::VectorXd *grad) {
        const MOGPModel model(init.with_params(x), sorted);
        if (grad != nullptr) {
            *grad = model.log_marginal_likelihood_gradient();
        }
        return model.log_marginal_likelihood();
    };
    std::vector<bool> fixed(init.num_params(), false);
    if (config.fix_period) {
        for (const auto i : init.period_param_indices()) {
            fixed[i] = true;
        }
    }
    const Eigen::VectorXd start = init.params();
    const auto result = maximize_with_restarts(objective, start, config, fixed);
    if (result.x == start) {
        return init;
    }
    return init.with_params(result.x);
}

MOGPSpec initial_mogp_spec(const std::vector<std::string> &segment_ids, const std::vector<KernelSpec> &single_output,
                           const std::vector<double> &stds, double length, double shared_fraction) {
    const std::size_t r = segment_ids.size();
    if (single_output.size() != r || stds.size() != r) {
        throw DomainError("initial_mogp_spec needs one single-output spec and std per segment");
    }
    if (!(length > 0.0) || !(shared_fraction > 0.0 && shared_fraction < 1.0)) {
        throw DomainError("initial_mogp_spec needs length > 0 and shared_fraction in (0, 1)");
    }
    const auto outputs = static_cast<Eigen::Index>(r);
    MOGPSpec spec;
    spec.segment_ids = segment_ids;
    const double precision = 1.0 / (length * length);
    spec.conv.precision = Eigen::MatrixXd::Constant(outputs, outputs, precision);
    spec.conv.amplitude = Eigen::MatrixXd::Zero(outputs, outputs);
    // A smoothing kernel of amplitude v and precision A contributes v^2 sqrt(pi / A) of variance.
    const double unit = std::pow(precision / std::numbers::pi, 0.25);
    const double off_diagonal = 0.1;
    const double row_norm = std::sqrt(1.0 + off_diagonal * off_diagonal * static_cast<double>(r - 1));
    for (Eigen::Index i = 0; i < outputs; ++i) {
        const double s = stds[static_cast<std::size_t>(i)] > 0.0 ? stds[static_cast<std::size_t>(i)] : 1.0;
        const double scale = s * std::sqrt(shared_fraction) * unit / row_norm;
        for (Eigen::Index q = 0; q < outputs; ++q) {
            spec.conv.amplitude(i, q) = scale * (i == q ? 1.0 : off_diagonal);
        }
    }
    const double keep = std::sqrt(1.0 - shared_fraction);
    for (std::size_t i = 0; i < r; ++i) {
        spec.noise.push_back(single_output[i].has_white_noise() ? single_output[i].noise_variance() : 0.1);
        std::vector<KernelLeaf> leaves;
        const KernelSpec latent = single_output[i].without_white_noise();
        for (auto leaf : latent.leaves()) {
            leaf.scale *= keep;
            leaves.push_back(leaf);
        }
        if (leaves.empty()) {
            leaves.push_back(KernelLeaf::se(keep * stds[i], length));
        }
        spec.temporal.emplace_back(std::move(leaves));
    }
    spec.validate();
    return spec;
}

} // namespace gpimpute
