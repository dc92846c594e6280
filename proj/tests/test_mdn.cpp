#include "markov/error.hpp"
#include "markov/mdn.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

using namespace markov;

namespace {

Trajectory linear_gaussian(std::size_t T, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::vector<double> flat(T);
    double x = 0.0;
    for (auto& v : flat) {
        x = 0.6 * x + 0.8 * n01(rng);
        v = x;
    }
    return make_trajectory_flat(std::move(flat), 1, 1.0, std::nullopt, "lg");
}

}  // namespace

TEST(MixtureDensity, SingleComponentMatchesAnalyticCf) {
    auto traj = linear_gaussian(2000, 21);
    MdnConfig cfg;
    cfg.components = 1;
    auto est = fit_mixture_density(traj, Direction::Forward, cfg);
    EXPECT_TRUE(std::isfinite(est.final_loss()));
    for (double x : {-1.0, 0.0, 1.0}) {
        for (double f : {0.5, 1.0, 2.0}) {
            // X_{t+1} | X_t = x ~ N(0.6 x, 0.64)
            const Complex want = std::exp(Complex(-0.5 * f * f * 0.64, 0.6 * f * x));
            EXPECT_LT(std::abs(est.evaluate(std::vector<double>{f}, std::vector<double>{x}) - want),
                      0.1)
                << "x=" << x << " f=" << f;
        }
    }
}

TEST(MixtureDensity, MixtureIsNormalizedAndCfConsistent) {
    auto traj = linear_gaussian(400, 5);
    MdnConfig cfg;
    cfg.components = 3;
    cfg.epochs = 100;
    auto est = fit_mixture_density(traj, Direction::Backward, cfg);
    const std::vector<double> x{0.3};
    auto mix = est.mixture_at(x);
    ASSERT_EQ(mix.weights.size(), 3u);
    EXPECT_NEAR(std::accumulate(mix.weights.begin(), mix.weights.end(), 0.0), 1.0, 1e-12);
    for (double s : mix.sigmas) EXPECT_GT(s, 0.0);
    const std::vector<double> f{0.9};
    Complex want{0.0, 0.0};
    for (std::size_t k = 0; k < 3; ++k) {
        want += mix.weights[k] *
                std::exp(Complex(-0.5 * f[0] * f[0] * mix.sigmas[k] * mix.sigmas[k], f[0] * mix.means[k]));
    }
    EXPECT_NEAR(std::abs(est.evaluate(f, x) - want), 0.0, 1e-12);
    EXPECT_EQ(est.evaluate(std::vector<double>{0.0}, x), Complex(1.0, 0.0));
    EXPECT_NEAR(std::abs(est.evaluate(std::vector<double>{-0.9}, x) - std::conj(est.evaluate(f, x))),
                0.0, 1e-15);
}

TEST(MixtureDensity, DeterministicForFixedSeed) {
    auto traj = linear_gaussian(300, 1);
    MdnConfig cfg;
    cfg.epochs = 50;
    auto a = fit_mixture_density(traj, Direction::Forward, cfg);
    auto b = fit_mixture_density(traj, Direction::Forward, cfg);
    const std::vector<double> f{1.3}, x{-0.2};
    EXPECT_EQ(a.evaluate(f, x), b.evaluate(f, x));
    EXPECT_EQ(a.final_loss(), b.final_loss());
}

TEST(MixtureDensity, Preconditions) {
    auto traj = linear_gaussian(25, 2);
    MdnConfig cfg;
    cfg.components = 0;
    try {
        fit_mixture_density(traj, Direction::Forward, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InvalidInput);
    }
    cfg.components = 3;
    try {
        fit_mixture_density(traj, Direction::Forward, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::InsufficientData);
    }
}
