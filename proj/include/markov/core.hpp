#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace markov {

using Complex = std::complex<double>;
using StateVector = std::vector<double>;
using Metadata = std::map<std::string, std::string>;

/// exp(i*theta). Built from cos/sin directly so that conjugation under
/// theta -> -theta is exact.
inline Complex unit_phase(double theta) { return {std::cos(theta), std::sin(theta)}; }

double dot(std::span<const double> a, std::span<const double> b);

/// Uniformly sampled multivariate series. States are stored row-major, one
/// row of `dim()` values per instant. Immutable once built.
class Trajectory {
public:
    std::size_t length() const noexcept { return length_; }
    std::size_t dim() const noexcept { return dim_; }
    double dt() const noexcept { return dt_; }
    const std::string& id() const noexcept { return id_; }
    const Metadata& metadata() const noexcept { return metadata_; }
    std::optional<std::string> meta(const std::string& key) const;

    std::span<const double> state(std::size_t t) const {
        return {states_.data() + t * dim_, dim_};
    }
    double at(std::size_t t, std::size_t j) const { return states_[t * dim_ + j]; }
    std::span<const double> flat_states() const noexcept { return states_; }
    const std::optional<std::vector<double>>& actions() const noexcept { return actions_; }

    Trajectory with_id(std::string id) const;
    Trajectory with_metadata(const std::string& key, std::string value) const;
    /// Samples [begin, end), actions sliced alongside.
    Trajectory slice(std::size_t begin, std::size_t end, std::string id) const;

    friend Trajectory make_trajectory_flat(std::vector<double> flat, std::size_t dim, double dt,
                                           std::optional<std::vector<double>> actions,
                                           std::string id, Metadata metadata);

private:
    Trajectory() = default;

    std::vector<double> states_;
    std::size_t length_ = 0;
    std::size_t dim_ = 0;
    double dt_ = 1.0;
    std::optional<std::vector<double>> actions_;
    std::string id_;
    Metadata metadata_;
};

/// Validates and builds a trajectory. Throws DimensionMismatch,
/// NonFiniteValue, LengthMismatch, NonPositiveDt or InsufficientData (T < 2).
Trajectory make_trajectory(const std::vector<StateVector>& states, double dt,
                           std::optional<std::vector<double>> actions = std::nullopt,
                           std::string id = {}, Metadata metadata = {});

Trajectory make_trajectory_flat(std::vector<double> flat, std::size_t dim, double dt,
                                std::optional<std::vector<double>> actions = std::nullopt,
                                std::string id = {}, Metadata metadata = {});

struct ScalingParams {
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct Standardized {
    Trajectory trajectory;
    ScalingParams params;
};

/// Per-dimension z-scoring with the sample (n-1) standard deviation.
/// Throws DegenerateDimension when a dimension's std is <= 1e-10.
Standardized standardize(const Trajectory& traj);
Trajectory unstandardize(const Trajectory& traj, const ScalingParams& params);

/// Sample mean and (n-1) standard deviation of column `j`.
double column_mean(const Trajectory& traj, std::size_t j);
double column_stddev(const Trajectory& traj, std::size_t j);

}  // namespace markov
