#pragma once

#include "markov/core.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <random>
#include <vector>

namespace markov {

/// Gaussian vector autoregression
///   X_{t+1} = sum_{j=1..p} A_j X_{t+1-j} + eps_t,  eps_t ~ N(0, noise_cov).
struct VarSpec {
    std::vector<Eigen::MatrixXd> coefficients;  // A_1 .. A_p, each d x d
    Eigen::MatrixXd noise_cov;
    std::size_t burn_in = 200;

    std::size_t order() const noexcept { return coefficients.size(); }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(noise_cov.rows()); }

    /// Throws DimensionMismatch for inconsistent shapes, InvalidInput for a
    /// covariance that is not symmetric positive definite, and
    /// NonStationarySpec when the companion spectral radius is >= 1.
    void validate() const;
};

/// Discrete chain of arbitrary order. Row `code` of `transition` is the
/// next-state distribution given the last `order` states (s_{t-order+1},
/// ..., s_t), encoded base n_states with the oldest state most significant.
struct ChainSpec {
    std::size_t order = 1;
    std::vector<std::vector<double>> transition;  // n_states^order rows, n_states columns
    std::vector<StateVector> embedding;           // n_states rows of dimension d
    std::size_t burn_in = 0;

    std::size_t n_states() const noexcept { return embedding.size(); }
    /// Throws NotStochastic or DimensionMismatch.
    void validate() const;
};

/// Spectral radius via repeated squaring, rho = lim ||A^(2^k)||^(1/2^k).
double spectral_radius(const Eigen::MatrixXd& a);
/// Block companion matrix of the VAR coefficients.
Eigen::MatrixXd companion_matrix(const VarSpec& spec);

/// T states after burn-in; metadata records true_order = p.
Trajectory gen_var(const VarSpec& spec, std::size_t length, std::mt19937_64& rng);

/// Simulated state indices (burn-in discarded).
std::vector<std::size_t> simulate_chain(const ChainSpec& spec, std::size_t length,
                                        std::mt19937_64& rng);
/// Embedded chain path; metadata records true_order.
Trajectory gen_chain(const ChainSpec& spec, std::size_t length, std::mt19937_64& rng);

struct HiddenStateSample {
    Trajectory trajectory;
    std::vector<int> regimes;
};

/// Two-regime hidden Markov chain with unit-variance Gaussian emissions
/// around `means[regime]`; the regime is kept with probability
/// `persistence` at each step. Throws InvalidInput for persistence outside
/// (0, 1) and EmptyTrajectory for length < 2.
HiddenStateSample gen_hidden_state(double persistence, const std::vector<StateVector>& means,
                                   std::size_t length, std::mt19937_64& rng);

}  // namespace markov
