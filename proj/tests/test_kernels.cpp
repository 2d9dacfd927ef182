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
#include "gpimpute/kernels.hpp"
#include "oracles.hpp"

namespace gpimpute {
namespace {

TEST(SquaredExponential, ZeroLagGivesSquaredScale) {
    EXPECT_DOUBLE_EQ(eval_se(3, 3, 2.0, 1.0), 4.0);
}

TEST(SquaredExponential, UnitLag) {
    EXPECT_NEAR(eval_se(0, 1, 1.0, 1.0), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(eval_se(0, 1, 1.0, 1.0), 0.60653, 1e-5);
}

TEST(SquaredExponential, DistantLagUnderflows) {
    EXPECT_LE(eval_se(0, 1000, 1.0, 1.0), 1e-300);
    EXPECT_GE(eval_se(0, 1000, 1.0, 1.0), 0.0);
}

TEST(SquaredExponential, RejectsNonPositiveParameters) {
    EXPECT_THROW(eval_se(0, 1, 0.0, 1.0), DomainError);
    EXPECT_THROW(eval_se(0, 1, 1.0, -1.0), DomainError);
}

TEST(SquaredExponential, TranslationInvariant) {
    Rng rng(11);
    for (int i = 0; i < 200; ++i) {
        const double t = uniform(rng, -50, 50), u = uniform(rng, -50, 50), c = uniform(rng, -1000, 1000);
        EXPECT_NEAR(eval_se(t + c, u + c, 1.3, 4.0), eval_se(t, u, 1.3, 4.0), 1e-12);
    }
}

TEST(Periodic, ZeroLag) {
    EXPECT_DOUBLE_EQ(eval_periodic(5, 5, 1.0, 0.7, 24.0), 1.0);
}

TEST(Periodic, FullPeriodIsExact) {
    EXPECT_EQ(eval_periodic(0, 288, 1.0, 1.0, 288.0), 1.0);
    EXPECT_EQ(eval_periodic(3, 3 + 3 * 288, 1.7, 0.4, 288.0), eval_periodic(3, 3, 1.7, 0.4, 288.0));
}

TEST(Periodic, HalfPeriod) {
    EXPECT_NEAR(eval_periodic(0, 144, 1.0, 1.0, 288.0), std::exp(-0.5), 1e-15);
}

TEST(Periodic, ShiftByPeriodIsExact) {
    Rng rng(4);
    for (int i = 0; i < 200; ++i) {
        const TimeBin t = static_cast<TimeBin>(uniform_index(rng, 1000));
        const TimeBin u = static_cast<TimeBin>(uniform_index(rng, 1000));
        const double p = static_cast<double>(1 + uniform_index(rng, 300));
        EXPECT_EQ(eval_periodic(static_cast<double>(t), static_cast<double>(u) + p, 1.2, 0.8, p),
                  eval_periodic(static_cast<double>(t), static_cast<double>(u), 1.2, 0.8, p));
    }
}

TEST(Periodic, RejectsNonPositiveParameters) {
    EXPECT_THROW(eval_periodic(0, 1, 1.0, 1.0, 0.0), DomainError);
    EXPECT_THROW(eval_periodic(0, 1, -1.0, 1.0, 5.0), DomainError);
    EXPECT_THROW(eval_periodic(0, 1, 1.0, 0.0, 5.0), DomainError);
}

TEST(WhiteNoise, KroneckerOnBins) {
    EXPECT_DOUBLE_EQ(eval_white_noise(5, 5, 0.25), 0.25);
    EXPECT_DOUBLE_EQ(eval_white_noise(5, 6, 0.25), 0.0);
    EXPECT_DOUBLE_EQ(eval_white_noise(0, 0, 1.0), 1.0);
    EXPECT_THROW(eval_white_noise(0, 0, 0.0), DomainError);
}

TEST(KernelSpec, SumEvaluation) {
    const KernelSpec spec({KernelLeaf::se(1, 1), KernelLeaf::white_noise(1)});
    EXPECT_DOUBLE_EQ(eval_spec(spec, 4, 4), 2.0);
    EXPECT_NEAR(eval_spec(spec, 4, 5), 0.60653, 1e-5);
}

TEST(KernelSpec, SingleLeafMatchesLeafFunction) {
    Rng rng(8);
    const KernelSpec se({KernelLeaf::se(1.5, 3.0)});
    const KernelSpec per({KernelLeaf::periodic(0.8, 1.1, 17.0)});
    for (int i = 0; i < 100; ++i) {
        const auto t = static_cast<TimeBin>(uniform_index(rng, 100));
        const auto u = static_cast<TimeBin>(uniform_index(rng, 100));
        EXPECT_EQ(eval_spec(se, t, u), eval_se(static_cast<double>(t), static_cast<double>(u), 1.5, 3.0));
        EXPECT_EQ(eval_spec(per, t, u),
                  eval_periodic(static_cast<double>(t), static_cast<double>(u), 0.8, 1.1, 17.0));
    }
}

TEST(KernelSpec, EmptySpecRejected) {
    EXPECT_THROW(eval_spec(KernelSpec{}, 0, 0), DomainError);
    EXPECT_THROW(gram(KernelSpec{}, std::vector<TimeBin>{0}), DomainError);
}

TEST(KernelSpec, LeavesValidated) {
    EXPECT_THROW(KernelSpec({KernelLeaf::se(-1, 1)}), DomainError);
    EXPECT_THROW(KernelSpec({KernelLeaf::white_noise(0)}), DomainError);
}

TEST(KernelSpec, SymmetricEvaluation) {
    Rng rng(21);
    for (int s = 0; s < 20; ++s) {
        const auto spec = oracle::random_spec(rng);
        for (int i = 0; i < 20; ++i) {
            const auto t = static_cast<TimeBin>(uniform_index(rng, 500));
            const auto u = static_cast<TimeBin>(uniform_index(rng, 500));
            EXPECT_EQ(eval_spec(spec, t, u), eval_spec(spec, u, t));
        }
    }
}

TEST(KernelSpec, TextRoundTrip) {
    const auto spec = KernelSpec::parse("SE(h=5.0,l=12.0)+PER(h=3.0,l=1.0,p=288)+WN(var=4.0)");
    ASSERT_EQ(spec.leaves().size(), 3u);
    EXPECT_EQ(spec.leaves()[1].period, 288.0);
    EXPECT_EQ(spec.to_string(), "SE(h=5,l=12)+PER(h=3,l=1,p=288)+WN(var=4)");
    EXPECT_EQ(KernelSpec::parse(spec.to_string()), spec);

    Rng rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto r = oracle::random_spec(rng);
        const auto once = KernelSpec::parse(r.to_string());
        EXPECT_EQ(KernelSpec::parse(once.to_string()), once);
        for (std::size_t k = 0; k < r.leaves().size(); ++k) {
            EXPECT_NEAR(once.leaves()[k].scale, r.leaves()[k].scale, 1e-8 * r.leaves()[k].scale);
        }
    }
}

TEST(KernelSpec, ParseErrors) {
    EXPECT_THROW(KernelSpec::parse(""), ParseError);
    EXPECT_THROW(KernelSpec::parse("SE(h=1)"), ParseError);
    EXPECT_THROW(KernelSpec::parse("RQ(h=1,l=1)"), ParseError);
    EXPECT_THROW(KernelSpec::parse("SE(h=1,l=1)*WN(var=1)"), ParseError);
    EXPECT_THROW(KernelSpec::parse("SE(h=x,l=1)"), ParseError);
    EXPECT_THROW(KernelSpec::parse("SE(h=-1,l=1)"), ParseError);
}

TEST(KernelSpec, LogParamsRoundTrip) {
    const auto spec = KernelSpec::parse("SE(h=2,l=10)+PER(h=0.5,l=1,p=288)+WN(var=0.1)");
    const auto theta = spec.log_params();
    ASSERT_EQ(theta.size(), 6);
    EXPECT_NEAR(theta(0), std::log(2.0), 1e-15);
    EXPECT_NEAR(theta(4), std::log(288.0), 1e-15);
    EXPECT_EQ(spec.period_param_indices(), std::vector<std::size_t>{4});
    const auto back = spec.with_log_params(theta);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_NEAR(back.leaves()[k].scale, spec.leaves()[k].scale, 1e-14);
    }
    EXPECT_THROW(spec.with_log_params(Eigen::VectorXd::Zero(3)), DomainError);
}

TEST(KernelSpec, NoiseAccessors) {
    const auto spec = KernelSpec::parse("SE(h=1,l=2)+WN(var=0.3)");
    EXPECT_TRUE(spec.has_white_noise());
    EXPECT_DOUBLE_EQ(spec.noise_variance(), 0.3);
    EXPECT_FALSE(spec.without_white_noise().has_white_noise());
    EXPECT_EQ((spec.without_white_noise() + KernelSpec({KernelLeaf::white_noise(0.3)})), spec);
}

TEST(Gram, SmallExamples) {
    const KernelSpec se({KernelLeaf::se(1, 1)});
    const std::vector<TimeBin> one{0};
    EXPECT_EQ(gram(se, one), Eigen::MatrixXd::Ones(1, 1));
    const std::vector<TimeBin> two{0, 1};
    const auto k = gram(se, two);
    EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(k(1, 1), 1.0);
    EXPECT_NEAR(k(0, 1), std::exp(-0.5), 1e-15);
    EXPECT_EQ(k(0, 1), k(1, 0));
    EXPECT_THROW(gram(se, std::vector<TimeBin>{}), DomainError);
}

TEST(Gram, SumOfLeafGrams) {
    Rng rng(5);
    for (int s = 0; s < 10; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto times = oracle::random_times(rng, 25, 80);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(25, 25);
        for (const auto &leaf : spec.leaves()) {
            sum += gram(KernelSpec({leaf}), times);
        }
        EXPECT_LE((gram(spec, times) - sum).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(Gram, MatchesDirectFormulas) {
    Rng rng(6);
    const auto spec = oracle::random_spec(rng);
    const auto times = oracle::random_times(rng, 30, 100);
    const auto k = gram(spec, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t j = 0; j < times.size(); ++j) {
            const double expect = oracle::latent_value(spec, times[i], times[j]) + (i == j ? oracle::noise_value(spec) : 0.0);
            EXPECT_NEAR(k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)), expect, 1e-12);
        }
    }
}

TEST(Gram, PositiveSemidefinite) {
    Rng rng(7);
    for (int s = 0; s < 100; ++s) {
        const bool noise = s % 2 == 0;
        const auto spec = oracle::random_spec(rng, noise);
        const auto n = 1 + uniform_index(rng, 200);
        const auto times = oracle::random_times(rng, n, 400);
        const auto k = gram(spec, times);
        EXPECT_LE((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
        EXPECT_GE(oracle::min_eigenvalue(k), -1e-8 * k.diagonal().mean());
    }
}

TEST(GramGradients, DiagonalExamples) {
    const KernelSpec se({KernelLeaf::se(3.0, 5.0)});
    const std::vector<TimeBin> t{7};
    const auto g = gram_gradients(se, t);
    ASSERT_EQ(g.size(), 2u);
    EXPECT_DOUBLE_EQ(g[0](0, 0), 2.0 * 9.0);
    EXPECT_DOUBLE_EQ(g[1](0, 0), 0.0);
}

TEST(GramGradients, MatchFiniteDifferences) {
    Rng rng(9);
    for (int s = 0; s < 50; ++s) {
        const auto spec = oracle::random_spec(rng);
        const auto times = oracle::random_times(rng, 12, 60);
        const auto grads = gram_gradients(spec, times);
        const auto theta = spec.log_params();
        ASSERT_EQ(grads.size(), static_cast<std::size_t>(theta.size()));
        for (Eigen::Index p = 0; p < theta.size(); ++p) {
            Eigen::VectorXd hi = theta, lo = theta;
            hi(p) += 1e-5;
            lo(p) -= 1e-5;
            const Eigen::MatrixXd fd = (gram(spec.with_log_params(hi), times) - gram(spec.with_log_params(lo), times)) / 2e-5;
            const double scale = std::max(fd.norm(), 1e-12);
            EXPECT_LE((grads[static_cast<std::size_t>(p)] - fd).norm() / scale, 1e-5) << spec.to_string() << " param " << p;
        }
    }
}

TEST(CrossGram, MatchesGramBlock) {
    Rng rng(10);
    const auto spec = oracle::random_spec(rng);
    const std::vector<TimeBin> a{0, 3, 9}, b{3, 4};
    const auto k = cross_gram(spec, a, b);
    EXPECT_EQ(k.rows(), 3);
    EXPECT_EQ(k.cols(), 2);
    EXPECT_DOUBLE_EQ(k(1, 0), eval_spec(spec, 3, 3));
    EXPECT_DOUBLE_EQ(k(2, 1), eval_spec(spec, 9, 4));
}

TEST(DefaultSpec, DailyPeriod) {
    const auto spec = default_temporal_spec();
    ASSERT_EQ(spec.leaves().size(), 3u);
    EXPECT_EQ(spec.leaves()[1].period, 288.0);
    EXPECT_TRUE(spec.has_white_noise());
}

} // namespace
} // namespace gpimpute
