#include "markov/error.hpp"
#include "markov/markov_test.hpp"
#include "markov/synthetic.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace markov;

namespace {

Trajectory iid(std::size_t T, std::size_t d, std::uint64_t seed, std::string id = "iid") {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<double> flat(T * d);
    for (double& v : flat) v = n01(rng);
    return make_trajectory_flat(std::move(flat), d, 1.0, std::nullopt, std::move(id));
}

Trajectory order_two(std::size_t T, std::uint64_t seed) {
    VarSpec spec;
    spec.coefficients = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Constant(1, 1, 0.9)};
    spec.noise_cov = Eigen::MatrixXd::Identity(1, 1);
    std::mt19937_64 rng(seed);
    return gen_var(spec, T, rng);
}

// S by its defining sum, written independently of the library loop.
Complex direct_s(const Trajectory& x, std::size_t lag, const StateVector& mu,
                 const StateVector& nu, const CcfEstimator& phi, const CcfEstimator& psi) {
    Complex acc{0.0, 0.0};
    const std::size_t n = x.length() - lag;
    for (std::size_t t = 0; t < n; ++t) {
        double pm = 0.0, pn = 0.0;
        for (std::size_t j = 0; j < x.dim(); ++j) {
            pm += mu[j] * x.at(t + lag, j);
            pn += nu[j] * x.at(t, j);
        }
        acc += (std::exp(Complex(0.0, pm)) - phi.evaluate(mu, x.state(t + lag - 1))) *
               (std::exp(Complex(0.0, pn)) - psi.evaluate(nu, x.state(t + 1)));
    }
    return acc / static_cast<double>(n);
}

TestConfig small_config() {
    TestConfig cfg;
    cfg.k_max = 4;
    cfg.n_freqs = 8;
    cfg.n_bootstrap = 99;
    return cfg;
}

}  // namespace

TEST(LagRule, OrderKUsesLagKPlusOne) {
    EXPECT_EQ(lag_for_order(1), 2u);
    EXPECT_EQ(lag_for_order(10), 11u);
}

TEST(SampleFrequencies, ShapeAndDeterminism) {
    std::mt19937_64 a(3), b(3);
    auto fa = sample_frequencies(3, 5, a);
    auto fb = sample_frequencies(3, 5, b);
    ASSERT_EQ(fa.size(), 5u);
    for (std::size_t m = 0; m < 5; ++m) {
        EXPECT_EQ(fa[m].mu.size(), 3u);
        EXPECT_EQ(fa[m].mu, fb[m].mu);
        EXPECT_EQ(fa[m].nu, fb[m].nu);
    }
}

TEST(StatisticS, MatchesDefiningSum) {
    auto x = iid(80, 2, 4);
    auto phi = fit_forward(x);
    auto psi = fit_backward(x);
    std::mt19937_64 rng(1);
    auto freqs = sample_frequencies(2, 5, rng);
    for (std::size_t lag : {1u, 2u, 5u}) {
        for (const auto& f : freqs) {
            const Complex got = statistic_s(x, lag, f.mu, f.nu, phi, psi);
            const Complex want = direct_s(x, lag, f.mu, f.nu, phi, psi);
            EXPECT_NEAR(std::abs(got - want), 0.0, 1e-13);
        }
    }
}

TEST(StatisticS, NullAtZeroFrequencies) {
    std::mt19937_64 rng(17);
    for (int draw = 0; draw < 30; ++draw) {
        auto x = iid(40 + draw, 1 + draw % 3, 100 + draw);
        auto phi = fit_forward(x);
        auto psi = fit_backward(x);
        auto f = sample_frequencies(x.dim(), 1, rng).front();
        const StateVector zero(x.dim(), 0.0);
        const std::size_t lag = 1 + draw % 5;
        EXPECT_EQ(statistic_s(x, lag, zero, f.nu, phi, psi), Complex(0.0, 0.0));
        EXPECT_EQ(statistic_s(x, lag, f.mu, zero, phi, psi), Complex(0.0, 0.0));
        EXPECT_EQ(statistic_s_tilde(x, lag, zero, f.nu, phi), Complex(0.0, 0.0));
    }
}

TEST(StatisticS, ConjugateSymmetry) {
    std::mt19937_64 rng(5);
    for (int draw = 0; draw < 30; ++draw) {
        auto x = iid(50, 2, 200 + draw);
        auto phi = fit_forward(x);
        auto psi = fit_backward(x);
        auto f = sample_frequencies(2, 1, rng).front();
        StateVector nm{-f.mu[0], -f.mu[1]}, nn{-f.nu[0], -f.nu[1]};
        const std::size_t lag = 1 + draw % 4;
        const Complex s = statistic_s(x, lag, f.mu, f.nu, phi, psi);
        EXPECT_NEAR(std::abs(statistic_s(x, lag, nm, nn, phi, psi) - std::conj(s)), 0.0, 1e-12);
    }
}

TEST(StatisticS, LagBeyondLengthIsTooShort) {
    auto x = iid(10, 1, 1);
    auto phi = fit_forward(x);
    auto psi = fit_backward(x);
    const StateVector f{1.0};
    try {
        statistic_s(x, 10, f, f, phi, psi);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TrajectoryTooShort);
    }
}

TEST(SupStatistic, MaxOverPairs) {
    auto x = iid(60, 2, 8);
    auto phi = fit_forward(x);
    auto psi = fit_backward(x);
    std::mt19937_64 rng(2);
    auto freqs = sample_frequencies(2, 6, rng);
    double want = 0.0;
    for (const auto& f : freqs) {
        want = std::max(want, std::sqrt(57.0) * std::abs(statistic_s(x, 3, f.mu, f.nu, phi, psi)));
    }
    EXPECT_NEAR(sup_statistic(x, 3, freqs, phi, psi), want, 1e-12);
    EXPECT_THROW(sup_statistic(x, 3, {}, phi, psi), Error);
}

TEST(OrderTester, ObservedStatisticMatchesSupOnStandardizedStates) {
    auto x = iid(90, 3, 12);
    auto cfg = small_config();
    std::mt19937_64 frng(4);
    auto freqs = sample_frequencies(3, 8, frng);
    OrderTester tester(x, cfg, freqs);
    auto z = standardize(x).trajectory;
    auto phi = fit_forward(z);
    auto psi = fit_backward(z);
    for (int k = 1; k <= 3; ++k) {
        std::mt19937_64 rng(k);
        auto r = tester.test_order(k, rng);
        EXPECT_EQ(r.lag, lag_for_order(k));
        EXPECT_EQ(r.n_effective, 90u - lag_for_order(k));
        EXPECT_NEAR(r.sup_stat, sup_statistic(z, lag_for_order(k), freqs, phi, psi), 1e-12);
    }
}

TEST(OrderTester, PValueRangeAndDeterminism) {
    auto x = iid(100, 2, 13);
    auto cfg = small_config();
    std::mt19937_64 a(77), b(77);
    auto ra = bootstrap_pvalue(x, 1, cfg, a);
    auto rb = bootstrap_pvalue(x, 1, cfg, b);
    EXPECT_EQ(ra.p_value, rb.p_value);
    EXPECT_EQ(ra.sup_stat, rb.sup_stat);
    EXPECT_GE(ra.p_value, 1.0 / 100.0);
    EXPECT_LE(ra.p_value, 1.0);
    EXPECT_EQ(ra.reject, ra.p_value <= cfg.alpha);
    // p * (B + 1) is an integer count
    const double scaled = ra.p_value * (cfg.n_bootstrap + 1);
    EXPECT_NEAR(scaled, std::round(scaled), 1e-9);
}

TEST(OrderTester, FeasibleOrderRespectsMinimumLength) {
    auto cfg = small_config();
    cfg.k_max = 10;
    cfg.min_effective_length = 30;
    std::mt19937_64 rng(1);
    auto freqs = sample_frequencies(1, 4, rng);
    OrderTester tester(iid(36, 1, 1), cfg, freqs);
    EXPECT_EQ(tester.max_feasible_order(), 5);
    std::mt19937_64 brng(2);
    EXPECT_THROW(tester.test_order(6, brng), Error);
}

TEST(EstimateOrder, FirstAcceptanceRule) {
    auto cfg = small_config();
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        cfg.rng_seed = seed;
        auto est = estimate_order(order_two(300, seed), cfg);
        ASSERT_FALSE(est.per_lag.empty());
        for (std::size_t i = 0; i + 1 < est.per_lag.size(); ++i) EXPECT_TRUE(est.per_lag[i].reject);
        if (est.capped) {
            EXPECT_EQ(est.order, est.k_max);
            EXPECT_TRUE(est.per_lag.back().reject);
        } else {
            EXPECT_FALSE(est.per_lag.back().reject);
            EXPECT_EQ(est.order, est.per_lag.back().k);
        }
    }
}

TEST(EstimateOrder, DetectsSecondOrderDependence) {
    auto cfg = small_config();
    cfg.rng_seed = 42;
    auto est = estimate_order(order_two(600, 9), cfg);
    EXPECT_TRUE(est.per_lag.front().reject);
    EXPECT_GE(est.order, 2);
}

TEST(EstimateOrder, IidAcceptsOrderOne) {
    auto cfg = small_config();
    cfg.rng_seed = 42;
    auto est = estimate_order(iid(300, 3, 10), cfg);
    EXPECT_EQ(est.order, 1);
    EXPECT_FALSE(est.capped);
    EXPECT_EQ(est.per_lag.size(), 1u);
}

TEST(EstimateOrder, FullTraceKeepsDecisionAndAddsLags) {
    auto cfg = small_config();
    cfg.rng_seed = 3;
    auto x = order_two(300, 4);
    auto brief = estimate_order(x, cfg);
    cfg.full_trace = true;
    auto full = estimate_order(x, cfg);
    EXPECT_EQ(full.order, brief.order);
    EXPECT_EQ(full.per_lag.size(), static_cast<std::size_t>(full.k_max));
    for (std::size_t i = 0; i < brief.per_lag.size(); ++i) {
        EXPECT_EQ(full.per_lag[i].p_value, brief.per_lag[i].p_value);
    }
}

TEST(EstimateOrder, TooShortTrajectory) {
    auto cfg = small_config();
    try {
        estimate_order(iid(31, 1, 1), cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::TrajectoryTooShort);
    }
}

TEST(EstimateOrder, MixtureDensityEstimatorRuns) {
    auto cfg = small_config();
    cfg.k_max = 2;
    cfg.estimator = EstimatorKind::MixtureDensity;
    cfg.mdn.epochs = 60;
    auto est = estimate_order(iid(120, 1, 3), cfg);
    EXPECT_GE(est.order, 1);
    EXPECT_LE(est.order, 2);
}

TEST(ReselectOrder, LowerAlphaIsAlwaysValid) {
    OrderEstimate est;
    est.alpha = 0.05;
    est.k_max = 5;
    est.order = 3;
    est.per_lag = {{1, 2, 0, 0.003, true, 0}, {2, 3, 0, 0.02, true, 0}, {3, 4, 0, 0.4, false, 0}};
    auto strict = reselect_order(est, 0.01);
    EXPECT_EQ(strict.order, 2);
    EXPECT_EQ(strict.per_lag.size(), 2u);
    EXPECT_THROW(reselect_order(est, 0.1), Error);
}

TEST(ReselectOrder, FullTraceAllowsHigherAlpha) {
    OrderEstimate est;
    est.alpha = 0.05;
    est.k_max = 3;
    est.order = 1;
    est.per_lag = {{1, 2, 0, 0.08, false, 0}, {2, 3, 0, 0.5, false, 0}, {3, 4, 0, 0.02, true, 0}};
    EXPECT_EQ(reselect_order(est, 0.1).order, 2);
    auto capped = reselect_order(est, 0.9);
    EXPECT_TRUE(capped.capped);
    EXPECT_EQ(capped.order, 3);
}

TEST(BatchTest, ParallelInvariantAndErrorsRecorded) {
    std::vector<Trajectory> trajs;
    for (int i = 0; i < 6; ++i) trajs.push_back(iid(80, 2, 50 + i, "t" + std::to_string(i)));
    trajs.push_back(iid(10, 2, 1, "short"));
    auto cfg = small_config();
    cfg.rng_seed = 9;
    auto one = batch_test(trajs, cfg, 1);
    auto four = batch_test(trajs, cfg, 4);
    ASSERT_EQ(one.size(), trajs.size());
    for (std::size_t i = 0; i < trajs.size(); ++i) {
        EXPECT_EQ(one[i].trajectory_id, trajs[i].id());
        ASSERT_EQ(one[i].estimate.has_value(), four[i].estimate.has_value());
        if (one[i].estimate) {
            ASSERT_EQ(one[i].estimate->per_lag.size(), four[i].estimate->per_lag.size());
            for (std::size_t k = 0; k < one[i].estimate->per_lag.size(); ++k) {
                EXPECT_EQ(one[i].estimate->per_lag[k].p_value, four[i].estimate->per_lag[k].p_value);
                EXPECT_EQ(one[i].estimate->per_lag[k].sup_stat, four[i].estimate->per_lag[k].sup_stat);
            }
        }
    }
    EXPECT_FALSE(one.back().estimate.has_value());
    EXPECT_NE(one.back().error.find("TrajectoryTooShort"), std::string::npos);
}

TEST(DeriveSeed, DependsOnSeedIdAndStates) {
    auto a = iid(20, 1, 1, "a");
    EXPECT_EQ(derive_seed(1, a), derive_seed(1, a));
    EXPECT_NE(derive_seed(1, a), derive_seed(2, a));
    EXPECT_NE(derive_seed(1, a), derive_seed(1, a.with_id("b")));
    EXPECT_NE(derive_seed(1, a), derive_seed(1, iid(20, 1, 2, "a")));
}

TEST(TestConfig, Validation) {
    TestConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.alpha = 1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.k_max = 0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = {};
    cfg.n_bootstrap = 0;
    EXPECT_THROW(cfg.validate(), Error);
}
