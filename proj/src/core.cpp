#include "markov/core.hpp"

#include "markov/error.hpp"

#include <utility>

namespace markov {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
    return s;
}

std::optional<std::string> Trajectory::meta(const std::string& key) const {
    auto it = metadata_.find(key);
    if (it == metadata_.end()) return std::nullopt;
    return it->second;
}

Trajectory Trajectory::with_id(std::string id) const {
    Trajectory out = *this;
    out.id_ = std::move(id);
    return out;
}

Trajectory Trajectory::with_metadata(const std::string& key, std::string value) const {
    Trajectory out = *this;
    out.metadata_[key] = std::move(value);
    return out;
}

Trajectory Trajectory::slice(std::size_t begin, std::size_t end, std::string id) const {
    if (begin >= end || end > length_) {
        throw Error(Errc::InvalidInput, "slice [" + std::to_string(begin) + ", " +
                                            std::to_string(end) + ") out of range");
    }
    std::vector<double> flat(states_.begin() + static_cast<std::ptrdiff_t>(begin * dim_),
                             states_.begin() + static_cast<std::ptrdiff_t>(end * dim_));
    std::optional<std::vector<double>> acts;
    if (actions_) {
        acts.emplace(actions_->begin() + static_cast<std::ptrdiff_t>(begin),
                     actions_->begin() + static_cast<std::ptrdiff_t>(end));
    }
    return make_trajectory_flat(std::move(flat), dim_, dt_, std::move(acts), std::move(id),
                                metadata_);
}

Trajectory make_trajectory_flat(std::vector<double> flat, std::size_t dim, double dt,
                                std::optional<std::vector<double>> actions, std::string id,
                                Metadata metadata) {
    if (dim == 0) throw Error(Errc::DimensionMismatch, "state dimension must be >= 1");
    if (flat.size() % dim != 0) {
        throw Error(Errc::DimensionMismatch, "flat state buffer is not a multiple of dim");
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error(Errc::NonPositiveDt, "dt must be positive, got " + std::to_string(dt));
    }
    const std::size_t length = flat.size() / dim;
    if (length < 2) {
        throw Error(Errc::InsufficientData,
                    "a trajectory needs at least 2 states, got " + std::to_string(length));
    }
    for (std::size_t i = 0; i < flat.size(); ++i) {
        if (!std::isfinite(flat[i])) {
            throw Error(Errc::NonFiniteValue, "state " + std::to_string(i / dim) + " component " +
                                                  std::to_string(i % dim) + " is not finite");
        }
    }
    if (actions) {
        if (actions->size() != length) {
            throw Error(Errc::LengthMismatch, "actions length " + std::to_string(actions->size()) +
                                                  " != states length " + std::to_string(length));
        }
        for (double a : *actions) {
            if (!std::isfinite(a)) throw Error(Errc::NonFiniteValue, "action is not finite");
        }
    }
    Trajectory t;
    t.states_ = std::move(flat);
    t.length_ = length;
    t.dim_ = dim;
    t.dt_ = dt;
    t.actions_ = std::move(actions);
    t.id_ = std::move(id);
    t.metadata_ = std::move(metadata);
    return t;
}

Trajectory make_trajectory(const std::vector<StateVector>& states, double dt,
                           std::optional<std::vector<double>> actions, std::string id,
                           Metadata metadata) {
    if (states.empty()) throw Error(Errc::InsufficientData, "no states");
    const std::size_t dim = states.front().size();
    std::vector<double> flat;
    flat.reserve(states.size() * dim);
    for (std::size_t t = 0; t < states.size(); ++t) {
        if (states[t].size() != dim) {
            throw Error(Errc::DimensionMismatch, "state " + std::to_string(t) + " has dimension " +
                                                     std::to_string(states[t].size()) +
                                                     ", expected " + std::to_string(dim));
        }
        flat.insert(flat.end(), states[t].begin(), states[t].end());
    }
    return make_trajectory_flat(std::move(flat), dim, dt, std::move(actions), std::move(id),
                                std::move(metadata));
}

double column_mean(const Trajectory& traj, std::size_t j) {
    double s = 0.0;
    for (std::size_t t = 0; t < traj.length(); ++t) s += traj.at(t, j);
    return s / static_cast<double>(traj.length());
}

double column_stddev(const Trajectory& traj, std::size_t j) {
    const double m = column_mean(traj, j);
    double ss = 0.0;
    for (std::size_t t = 0; t < traj.length(); ++t) {
        const double dev = traj.at(t, j) - m;
        ss += dev * dev;
    }
    return std::sqrt(ss / static_cast<double>(traj.length() - 1));
}

Standardized standardize(const Trajectory& traj) {
    const std::size_t d = traj.dim();
    ScalingParams params{std::vector<double>(d), std::vector<double>(d)};
    for (std::size_t j = 0; j < d; ++j) {
        params.mean[j] = column_mean(traj, j);
        params.stddev[j] = column_stddev(traj, j);
        if (!(params.stddev[j] > 1e-10)) {
            throw Error(Errc::DegenerateDimension,
                        "dimension " + std::to_string(j) + " of '" + traj.id() + "' is constant");
        }
    }
    std::vector<double> flat(traj.flat_states().begin(), traj.flat_states().end());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const std::size_t j = i % d;
        flat[i] = (flat[i] - params.mean[j]) / params.stddev[j];
    }
    auto out = make_trajectory_flat(std::move(flat), d, traj.dt(), traj.actions(), traj.id(),
                                    traj.metadata());
    return {std::move(out), std::move(params)};
}

Trajectory unstandardize(const Trajectory& traj, const ScalingParams& params) {
    const std::size_t d = traj.dim();
    if (params.mean.size() != d || params.stddev.size() != d) {
        throw Error(Errc::DimensionMismatch, "scaling params do not match trajectory dimension");
    }
    std::vector<double> flat(traj.flat_states().begin(), traj.flat_states().end());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const std::size_t j = i % d;
        flat[i] = flat[i] * params.stddev[j] + params.mean[j];
    }
    return make_trajectory_flat(std::move(flat), d, traj.dt(), traj.actions(), traj.id(),
                                traj.metadata());
}

}  // namespace markov
