#pragma once

#include "markov/core.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace markov {

/// Forward: E[exp(i f'X_{t+1}) | X_t = x]. Backward: E[exp(i f'X_t) | X_{t+1} = x].
enum class Direction { Forward, Backward };
enum class EstimatorKind { Kernel, MixtureDensity };

/// A fitted one-step conditional characteristic function.
class CcfEstimator {
public:
    virtual ~CcfEstimator() = default;

    virtual Direction direction() const noexcept = 0;
    virtual EstimatorKind kind() const noexcept = 0;
    virtual std::size_t dim() const noexcept = 0;

    /// Throws DimensionMismatch when freq or x does not match dim().
    Complex evaluate(std::span<const double> freq, std::span<const double> x) const;

    /// result[m][s] = evaluate(freqs[m], points.state(s)). Implementations
    /// batch the work so that per-point setup is shared across frequencies.
    std::vector<std::vector<Complex>> evaluate_grid(std::span<const StateVector> freqs,
                                                    const Trajectory& points) const;

protected:
    virtual Complex do_evaluate(std::span<const double> freq, std::span<const double> x) const = 0;
    virtual std::vector<std::vector<Complex>> do_evaluate_grid(std::span<const StateVector> freqs,
                                                               const Trajectory& points) const;
};

/// Nadaraya-Watson estimator with a Gaussian product kernel over the T-1
/// adjacent pairs of a trajectory.
class KernelCcf final : public CcfEstimator {
public:
    KernelCcf(Direction direction, std::vector<double> conditioning, std::vector<double> targets,
              std::size_t dim, std::vector<double> bandwidth);

    Direction direction() const noexcept override { return direction_; }
    EstimatorKind kind() const noexcept override { return EstimatorKind::Kernel; }
    std::size_t dim() const noexcept override { return dim_; }
    std::size_t pairs() const noexcept { return conditioning_.size() / dim_; }
    const std::vector<double>& bandwidth() const noexcept { return bandwidth_; }

protected:
    Complex do_evaluate(std::span<const double> freq, std::span<const double> x) const override;
    std::vector<std::vector<Complex>> do_evaluate_grid(std::span<const StateVector> freqs,
                                                       const Trajectory& points) const override;

private:
    // Unnormalized weights, max weight 1. Returns their sum.
    double kernel_weights(std::span<const double> x, std::vector<double>& w) const;

    Direction direction_;
    std::vector<double> conditioning_;
    std::vector<double> targets_;
    std::size_t dim_;
    std::vector<double> bandwidth_;
    std::vector<double> inv_bandwidth_;
};

/// Per-dimension Silverman bandwidth 1.06 * sd_j * n^(-1/(4+d)) over the
/// conditioning states of `n` pairs. A dimension with no spread gets sd = 1.
std::vector<double> silverman_bandwidth(std::span<const double> conditioning, std::size_t dim);

/// nullopt bandwidth selects Silverman's rule. Throws InsufficientData for
/// T < 2 and NonPositiveBandwidth for any explicit h <= 0.
KernelCcf fit_forward(const Trajectory& traj,
                      const std::optional<std::vector<double>>& bandwidth = std::nullopt);
KernelCcf fit_backward(const Trajectory& traj,
                       const std::optional<std::vector<double>>& bandwidth = std::nullopt);

/// Exact one-step CCF of a finite chain: sum_j P(i,j) exp(i freq'embed(j)).
/// Throws NotStochastic if a row has negative entries or does not sum to 1
/// within 1e-12.
Complex exact_ccf_discrete(const std::vector<std::vector<double>>& transition,
                           const std::vector<StateVector>& embed, std::span<const double> freq,
                           std::size_t state_index);

/// (1/n) sum exp(i freq'x). Throws EmptyInput for no samples.
Complex empirical_cf(const std::vector<StateVector>& samples, std::span<const double> freq);
Complex empirical_cf(const Trajectory& traj, std::span<const double> freq);

}  // namespace markov
