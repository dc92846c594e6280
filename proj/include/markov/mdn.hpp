#pragma once

#include "markov/ccf.hpp"

#include <cstdint>
#include <vector>

namespace markov {

struct MdnConfig {
    std::size_t components = 3;
    std::size_t hidden = 16;
    std::size_t epochs = 600;
    double learning_rate = 0.01;
    std::uint64_t seed = 7;
};

/// Conditional diagonal-Gaussian mixture at one conditioning point.
struct GaussianMixture {
    std::vector<double> weights;  // K
    std::vector<double> means;    // K x d, row-major
    std::vector<double> sigmas;   // K x d, row-major
};

/// Mixture density network: a one-hidden-layer tanh network mapping the
/// conditioning state to a K-component diagonal Gaussian mixture over the
/// target state. The CCF is evaluated in closed form from the mixture,
///   sum_k pi_k exp(i f'm_k - f' diag(s_k^2) f / 2).
class MixtureDensityCcf final : public CcfEstimator {
public:
    Direction direction() const noexcept override { return direction_; }
    EstimatorKind kind() const noexcept override { return EstimatorKind::MixtureDensity; }
    std::size_t dim() const noexcept override { return dim_; }
    std::size_t components() const noexcept { return components_; }
    /// Mean negative log-likelihood after the last epoch.
    double final_loss() const noexcept { return final_loss_; }

    GaussianMixture mixture_at(std::span<const double> x) const;

    friend MixtureDensityCcf fit_mixture_density(const Trajectory& traj, Direction direction,
                                                 const MdnConfig& config);

protected:
    Complex do_evaluate(std::span<const double> freq, std::span<const double> x) const override;

private:
    MixtureDensityCcf() = default;

    Direction direction_ = Direction::Forward;
    std::size_t dim_ = 0;
    std::size_t components_ = 0;
    std::size_t hidden_ = 0;
    // Parameters packed as [W1 (H x d), b1 (H), Wo (O x H), bo (O)], O = K(1 + 2d).
    std::vector<double> params_;
    double final_loss_ = 0.0;
};

/// Trains by full-batch Adam on the mixture negative log-likelihood.
/// Throws InvalidInput (components == 0), InsufficientData
/// (T < 10 * components) and TrainingDiverged (non-finite loss).
MixtureDensityCcf fit_mixture_density(const Trajectory& traj, Direction direction,
                                      const MdnConfig& config = {});

}  // namespace markov
