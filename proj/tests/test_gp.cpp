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
#include <numbers>

#include <gtest/gtest.h>

#include "gpimpute/errors.hpp"
#include "gpimpute/gp.hpp"
#include "oracles.hpp"

namespace gpimpute {
namespace {

ObservationSeries make_series(std::vector<TimeBin> times, Eigen::VectorXd values) {
    ObservationSeries s;
    s.segment_id = "seg";
    s.times = std::move(times);
    s.values = std::move(values);
    return s;
}

ObservationSeries random_series(Rng &rng, std::size_t n, TimeBin span) {
    auto times = oracle::random_times(rng, n, span);
    return make_series(times, oracle::random_vector(rng, static_cast<Eigen::Index>(n)));
}

const KernelSpec kUnit({KernelLeaf::se(1, 1), KernelLeaf::white_noise(1)});

TEST(GPFit, ScalarFactor) {
    const GPModel model(make_series({0}, Eigen::VectorXd::Zero(1)), kUnit);
    EXPECT_DOUBLE_EQ(model.covariance()(0, 0), 2.0);
    EXPECT_NEAR(model.cholesky_lower()(0, 0), std::sqrt(2.0), 1e-15);
    EXPECT_DOUBLE_EQ(model.alpha()(0), 0.0);
}

TEST(GPFit, RejectsDuplicateOrEmptyTimes) {
    EXPECT_THROW(GPModel(make_series({3, 3}, Eigen::VectorXd::Zero(2)), kUnit), DomainError);
    EXPECT_THROW(GPModel(make_series({}, Eigen::VectorXd::Zero(0)), kUnit), DomainError);
    EXPECT_THROW(GPModel(make_series({0, 1}, Eigen::VectorXd::Zero(1)), kUnit), DomainError);
    Eigen::VectorXd bad(1);
    bad << std::nan("");
    EXPECT_THROW(GPModel(make_series({0}, bad), kUnit), DomainError);
}

TEST(GPFit, ReconstructionAndSolve) {
    Rng rng(1);
    for (int s = 0; s < 20; ++s) {
        const auto spec = oracle::random_spec(rng);
        const GPModel model(random_series(rng, 5 + s, 60), spec);
        const Eigen::MatrixXd l = model.cholesky_lower();
        const auto &v = model.covariance();
        EXPECT_LE((l * l.transpose() - v).norm() / v.norm(), 1e-10);
        const auto &y = model.series().values;
        EXPECT_LE((v * model.alpha() - y).norm(), 1e-8 * y.norm());
        EXPECT_EQ(model.jitter(), 0.0);
    }
}

TEST(GPFit, Deterministic) {
    Rng rng(2);
    const auto spec = oracle::random_spec(rng);
    const auto series = random_series(rng, 10, 40);
    const GPModel a(series, spec), b(series, spec);
    EXPECT_EQ(a.alpha(), b.alpha());
    EXPECT_EQ(a.log_marginal_likelihood(), b.log_marginal_likelihood());
}

TEST(GPFit, JitterRescuesSingularCovariance) {
    // Noise-free SE on adjacent bins with a huge length-scale is numerically singular.
    const KernelSpec spec({KernelLeaf::se(1, 1e4)});
    std::vector<TimeBin> times;
    for (TimeBin t = 0; t < 30; ++t) {
        times.push_back(t);
    }
    const GPModel model(make_series(times, Eigen::VectorXd::Ones(30)), spec);
    EXPECT_GT(model.jitter(), 0.0);
    EXPECT_LE(model.jitter(), 1e-4 * model.covariance().diagonal().mean());
}

TEST(GPLikelihood, UnivariateExamples) {
    const GPModel at_mean(make_series({0}, Eigen::VectorXd::Zero(1)), kUnit);
    EXPECT_NEAR(at_mean.log_marginal_likelihood(), -0.5 * std::log(4.0 * std::numbers::pi), 1e-14);
    EXPECT_NEAR(at_mean.log_marginal_likelihood(), -1.26551, 1e-5);
    const GPModel off(make_series({0}, Eigen::VectorXd::Constant(1, 2.0)), kUnit);
    EXPECT_NEAR(off.log_marginal_likelihood(), -1.0 - 0.5 * std::log(4.0 * std::numbers::pi), 1e-14);
}

TEST(GPLikelihood, MatchesDenseDensity) {
    Rng rng(3);
    for (int s = 0; s < 30; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto n = 1 + uniform_index(rng, 50);
        const GPModel model(random_series(rng, n, 120), spec);
        const double dense = oracle::dense_log_density(model.covariance(), model.series().values);
        EXPECT_LE(std::abs(model.log_marginal_likelihood() - dense), 1e-10 * std::abs(dense));
    }
}

TEST(GPLikelihood, GradientMatchesFiniteDifferences) {
    Rng rng(4);
    for (int s = 0; s < 50; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto series = random_series(rng, 15, 60);
        const GPModel model(series, spec);
        const auto analytic = model.log_marginal_likelihood_gradient();
        const auto fd = oracle::central_difference(
            [&](const Eigen::VectorXd &x) { return GPModel(series, spec.with_log_params(x)).log_marginal_likelihood(); },
            spec.log_params());
        EXPECT_LE(oracle::relative_error(analytic, fd), 1e-5) << spec.to_string();
    }
}

TEST(GPPredict, ConjugateShrinkage) {
    const GPModel model(make_series({0}, Eigen::VectorXd::Constant(1, 2.0)), kUnit);
    const auto p = model.predict(0);
    EXPECT_NEAR(p.mean, 1.0, 1e-15);
    EXPECT_NEAR(p.variance, 1.5, 1e-15);
    EXPECT_NEAR(p.latent_variance, 0.5, 1e-15);
}

TEST(GPPredict, RevertsToPriorFarFromData) {
    const GPModel model(make_series({0, 1, 2}, Eigen::Vector3d(1.0, -2.0, 0.5)), kUnit);
    const auto p = model.predict(10000);
    EXPECT_NEAR(p.mean, 0.0, 1e-12);
    EXPECT_NEAR(p.variance, 2.0, 1e-12);
}

TEST(GPPredict, MatchesBruteForceConditioning) {
    Rng rng(5);
    for (int s = 0; s < 100; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto n = 1 + uniform_index(rng, 20);
        const auto series = random_series(rng, n, 50);
        const GPModel model(series, spec);
        std::vector<TimeBin> targets;
        for (int k = 0; k < 4; ++k) {
            targets.push_back(static_cast<TimeBin>(uniform_index(rng, 70)) - 10);
        }
        const auto points = model.predict(targets);
        for (std::size_t k = 0; k < targets.size(); ++k) {
            const auto ref = oracle::gp_condition(spec, series.times, series.values, {targets[k]});
            EXPECT_NEAR(points[k].mean, ref.mean(0), 1e-8);
            EXPECT_NEAR(points[k].variance, ref.covariance(0, 0), 1e-8);
        }
    }
}

TEST(GPPredict, VarianceBoundedByPrior) {
    Rng rng(6);
    for (int s = 0; s < 50; ++s) {
        const auto spec = oracle::random_spec(rng);
        const GPModel model(random_series(rng, 10, 30), spec);
        for (TimeBin t = -5; t < 35; ++t) {
            const auto p = model.predict(t);
            EXPECT_GT(p.variance, 0.0);
            EXPECT_LE(p.variance, eval_spec(spec, t, t) + 1e-12);
        }
    }
}

TEST(GPPredict, MoreDataNeverIncreasesVariance) {
    Rng rng(7);
    for (int s = 0; s < 50; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto n = 2 + uniform_index(rng, 9);
        const auto full = random_series(rng, n, 25);
        const auto drop = uniform_index(rng, n);
        ObservationSeries partial = full;
        partial.times.erase(partial.times.begin() + static_cast<std::ptrdiff_t>(drop));
        Eigen::VectorXd kept(static_cast<Eigen::Index>(n - 1));
        for (Eigen::Index i = 0, j = 0; i < static_cast<Eigen::Index>(n); ++i) {
            if (i != static_cast<Eigen::Index>(drop)) {
                kept(j++) = full.values(i);
            }
        }
        partial.values = kept;
        const GPModel big(full, spec), small(partial, spec);
        for (TimeBin t = 0; t < 25; ++t) {
            EXPECT_LE(big.predict(t).variance, small.predict(t).variance + 1e-12);
        }
    }
}

TEST(GPPredict, InterpolatesAsNoiseVanishes) {
    const KernelSpec spec({KernelLeaf::se(10, 3), KernelLeaf::white_noise(1e-10)});
    const GPModel model(make_series({0, 4, 9}, Eigen::Vector3d(12.5, -3.0, 7.25)), spec);
    EXPECT_NEAR(model.predict(4).mean, -3.0, 1e-4);
    EXPECT_NEAR(model.predict(9).mean, 7.25, 1e-4);
}

TEST(GPOptimize, RecoversGeneratingHyperparameters) {
    const KernelSpec truth({KernelLeaf::se(2, 10), KernelLeaf::white_noise(0.1)});
    std::vector<TimeBin> times;
    for (TimeBin t = 0; t < 200; ++t) {
        times.push_back(t);
    }
    const Eigen::MatrixXd l = gram(truth, times).llt().matrixL();
    int recovered = 0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        const auto series = make_series(times, l * oracle::random_vector(rng, 200));
        const KernelSpec init({KernelLeaf::se(1, 5), KernelLeaf::white_noise(0.5)});
        OptimizerConfig config;
        config.seed = seed;
        const auto fitted = optimize_hyperparams(series, init, config);
        const Eigen::ArrayXd err = (fitted.log_params() - truth.log_params()).array().abs();
        recovered += (err <= 0.5).all() ? 1 : 0;
    }
    EXPECT_GE(recovered, 8);
}

TEST(GPOptimize, NeverWorseThanInit) {
    Rng rng(8);
    for (int s = 0; s < 20; ++s) {
        const auto series = random_series(rng, 30, 80);
        const auto init = oracle::random_spec(rng);
        OptimizerConfig config;
        config.seed = static_cast<std::uint64_t>(s);
        config.restarts = 1;
        const auto fitted = optimize_hyperparams(series, init, config);
        EXPECT_GE(GPModel(series, fitted).log_marginal_likelihood(),
                  GPModel(series, init).log_marginal_likelihood() - config.tolerance);
    }
}

TEST(GPOptimize, FixedPointReturnsInit) {
    Rng rng(9);
    const auto series = random_series(rng, 25, 60);
    OptimizerConfig config;
    config.tolerance = 1e-9;
    config.value_tolerance = 0.0;
    config.max_iters = 1000;
    config.restarts = 1;
    const auto opt = optimize_hyperparams(series, KernelSpec({KernelLeaf::se(1, 3), KernelLeaf::white_noise(0.5)}), config);
    ASSERT_LT(GPModel(series, opt).log_marginal_likelihood_gradient().lpNorm<Eigen::Infinity>(), 1e-6);
    OptimizerConfig again;
    EXPECT_EQ(optimize_hyperparams(series, opt, again), opt);
}

TEST(GPOptimize, ZeroIterationsReturnsInit) {
    Rng rng(10);
    const auto series = random_series(rng, 10, 30);
    OptimizerConfig config;
    config.max_iters = 0;
    EXPECT_EQ(optimize_hyperparams(series, kUnit, config), kUnit);
}

TEST(GPOptimize, PeriodStaysFixedByDefault) {
    Rng rng(11);
    const auto series = random_series(rng, 40, 100);
    const auto init = KernelSpec::parse("SE(h=1,l=5)+PER(h=0.5,l=1,p=24)+WN(var=0.2)");
    const auto fitted = optimize_hyperparams(series, init);
    EXPECT_NEAR(fitted.leaves()[1].period, 24.0, 1e-12);
}

TEST(GPOptimize, NeedsTwoObservations) {
    EXPECT_THROW(optimize_hyperparams(make_series({0}, Eigen::VectorXd::Zero(1)), kUnit), InsufficientDataError);
}

} // namespace
} // namespace gpimpute
