#include "markov/synthetic.hpp"

#include "markov/error.hpp"

#include <cmath>
#include <string>

namespace markov {

double spectral_radius(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols()) throw Error(Errc::DimensionMismatch, "matrix is not square");
    double norm = a.norm();
    if (norm == 0.0) return 0.0;
    Eigen::MatrixXd m = a / norm;
    // a^(2^k) = exp(log_scale) * m, with ||m|| = 1.
    double log_scale = std::log(norm);
    constexpr int kSquarings = 50;
    for (int k = 0; k < kSquarings; ++k) {
        Eigen::MatrixXd sq = m * m;
        const double c = sq.norm();
        if (c == 0.0) return 0.0;  // nilpotent
        m = sq / c;
        log_scale = 2.0 * log_scale + std::log(c);
    }
    return std::exp(std::ldexp(log_scale, -kSquarings));
}

Eigen::MatrixXd companion_matrix(const VarSpec& spec) {
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const auto p = static_cast<Eigen::Index>(spec.order());
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d * p, d * p);
    for (Eigen::Index j = 0; j < p; ++j) {
        c.block(0, j * d, d, d) = spec.coefficients[static_cast<std::size_t>(j)];
    }
    if (p > 1) c.block(d, 0, d * (p - 1), d * (p - 1)).setIdentity();
    return c;
}

void VarSpec::validate() const {
    if (coefficients.empty()) throw Error(Errc::InvalidInput, "VAR order must be >= 1");
    const auto d = noise_cov.rows();
    if (d < 1 || noise_cov.cols() != d) {
        throw Error(Errc::DimensionMismatch, "noise covariance must be square and nonempty");
    }
    for (const auto& a : coefficients) {
        if (a.rows() != d || a.cols() != d) {
            throw Error(Errc::DimensionMismatch, "coefficient matrices must be d x d");
        }
    }
    if (!noise_cov.isApprox(noise_cov.transpose(), 1e-12) ||
        noise_cov.llt().info() != Eigen::Success) {
        throw Error(Errc::InvalidInput, "noise covariance must be symmetric positive definite");
    }
    const double rho = spectral_radius(companion_matrix(*this));
    if (!(rho < 1.0)) {
        throw Error(Errc::NonStationarySpec,
                    "companion spectral radius " + std::to_string(rho) + " >= 1");
    }
}

Trajectory gen_var(const VarSpec& spec, std::size_t length, std::mt19937_64& rng) {
    spec.validate();
    if (length < 2) throw Error(Errc::EmptyTrajectory, "length must be >= 2");
    const auto d = static_cast<Eigen::Index>(spec.dim());
    const std::size_t p = spec.order();
    const Eigen::MatrixXd chol = spec.noise_cov.llt().matrixL();
    std::normal_distribution<double> normal(0.0, 1.0);

    // history[0] is the most recent state.
    std::vector<Eigen::VectorXd> history(p, Eigen::VectorXd::Zero(d));
    std::vector<double> flat;
    flat.reserve(length * static_cast<std::size_t>(d));
    Eigen::VectorXd z(d);
    for (std::size_t step = 0; step < spec.burn_in + length; ++step) {
        for (Eigen::Index j = 0; j < d; ++j) z[j] = normal(rng);
        Eigen::VectorXd next = chol * z;
        for (std::size_t j = 0; j < p; ++j) next += spec.coefficients[j] * history[j];
        for (std::size_t j = p - 1; j > 0; --j) history[j] = history[j - 1];
        history[0] = next;
        if (step >= spec.burn_in) flat.insert(flat.end(), next.data(), next.data() + d);
    }
    Metadata meta{{"generator", "var"}, {"true_order", std::to_string(p)}};
    return make_trajectory_flat(std::move(flat), static_cast<std::size_t>(d), 1.0, std::nullopt,
                                "var", std::move(meta));
}

void ChainSpec::validate() const {
    const std::size_t n = n_states();
    if (n == 0 || order == 0) throw Error(Errc::InvalidInput, "chain needs states and order >= 1");
    std::size_t rows = 1;
    for (std::size_t i = 0; i < order; ++i) rows *= n;
    if (transition.size() != rows) {
        throw Error(Errc::DimensionMismatch, "transition needs " + std::to_string(rows) +
                                                 " rows for order " + std::to_string(order));
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (transition[r].size() != n) throw Error(Errc::NotStochastic, "row width != n_states");
        double sum = 0.0;
        for (double p : transition[r]) {
            if (!(p >= 0.0)) throw Error(Errc::NotStochastic, "negative probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw Error(Errc::NotStochastic,
                        "row " + std::to_string(r) + " sums to " + std::to_string(sum));
        }
    }
    const std::size_t d = embedding.front().size();
    if (d == 0) throw Error(Errc::DimensionMismatch, "embedding dimension must be >= 1");
    for (const auto& e : embedding) {
        if (e.size() != d) throw Error(Errc::DimensionMismatch, "ragged embedding");
    }
}

std::vector<std::size_t> simulate_chain(const ChainSpec& spec, std::size_t length,
                                        std::mt19937_64& rng) {
    spec.validate();
    const std::size_t n = spec.n_states();
    std::uniform_int_distribution<std::size_t> initial(0, n - 1);
    std::vector<std::size_t> history(spec.order);
    for (auto& s : history) s = initial(rng);

    std::vector<std::size_t> out;
    out.reserve(length);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t step = 0; step < spec.burn_in + length; ++step) {
        std::size_t code = 0;
        for (std::size_t s : history) code = code * n + s;
        const auto& row = spec.transition[code];
        const double u = unif(rng);
        std::size_t next = n - 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            acc += row[j];
            if (u < acc) {
                next = j;
                break;
            }
        }
        // Guard against rounding in the cumulative sum landing on a zero row entry.
        while (row[next] == 0.0 && next > 0) --next;
        history.erase(history.begin());
        history.push_back(next);
        if (step >= spec.burn_in) out.push_back(next);
    }
    return out;
}

Trajectory gen_chain(const ChainSpec& spec, std::size_t length, std::mt19937_64& rng) {
    if (length < 2) throw Error(Errc::EmptyTrajectory, "length must be >= 2");
    const auto path = simulate_chain(spec, length, rng);
    const std::size_t d = spec.embedding.front().size();
    std::vector<double> flat;
    flat.reserve(length * d);
    for (std::size_t s : path) {
        flat.insert(flat.end(), spec.embedding[s].begin(), spec.embedding[s].end());
    }
    Metadata meta{{"generator", "chain"}, {"true_order", std::to_string(spec.order)}};
    return make_trajectory_flat(std::move(flat), d, 1.0, std::nullopt, "chain", std::move(meta));
}

HiddenStateSample gen_hidden_state(double persistence, const std::vector<StateVector>& means,
                                   std::size_t length, std::mt19937_64& rng) {
    if (!(persistence > 0.0 && persistence < 1.0)) {
        throw Error(Errc::InvalidInput, "persistence must be in (0, 1)");
    }
    if (means.size() != 2) throw Error(Errc::InvalidInput, "exactly two regime means required");
    if (length < 2) throw Error(Errc::EmptyTrajectory, "length must be >= 2");
    const std::size_t d = means[0].size();
    if (d == 0 || means[1].size() != d) throw Error(Errc::DimensionMismatch, "regime means");

    std::bernoulli_distribution stay(persistence);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    int regime = coin(rng) ? 1 : 0;
    std::vector<int> regimes;
    regimes.reserve(length);
    std::vector<double> flat;
    flat.reserve(length * d);
    for (std::size_t t = 0; t < length; ++t) {
        if (t > 0 && !stay(rng)) regime = 1 - regime;
        regimes.push_back(regime);
        for (std::size_t j = 0; j < d; ++j) {
            flat.push_back(means[static_cast<std::size_t>(regime)][j] + normal(rng));
        }
    }
    Metadata meta{{"generator", "hidden"}, {"true_order", "none"}};
    return {make_trajectory_flat(std::move(flat), d, 1.0, std::nullopt, "hidden", std::move(meta)),
            std::move(regimes)};
}

}  // namespace markov
