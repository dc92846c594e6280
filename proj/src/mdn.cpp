#include "markov/mdn.hpp"

#include "markov/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace markov {

namespace {

constexpr double kLogSigmaMin = -7.0;
constexpr double kLogSigmaMax = 5.0;

struct Layout {
    std::size_t d, h, k;
    std::size_t out() const { return k * (1 + 2 * d); }
    std::size_t w1() const { return 0; }
    std::size_t b1() const { return h * d; }
    std::size_t wo() const { return b1() + h; }
    std::size_t bo() const { return wo() + out() * h; }
    std::size_t size() const { return bo() + out(); }
};

// Output vector layout: [logits (K), means (K x d), log-sigmas (K x d)].
void forward(const Layout& L, const std::vector<double>& p, std::span<const double> x,
             std::vector<double>& hidden, std::vector<double>& out) {
    hidden.assign(L.h, 0.0);
    for (std::size_t i = 0; i < L.h; ++i) {
        double a = p[L.b1() + i];
        for (std::size_t j = 0; j < L.d; ++j) a += p[L.w1() + i * L.d + j] * x[j];
        hidden[i] = std::tanh(a);
    }
    out.assign(L.out(), 0.0);
    for (std::size_t o = 0; o < L.out(); ++o) {
        double a = p[L.bo() + o];
        for (std::size_t i = 0; i < L.h; ++i) a += p[L.wo() + o * L.h + i] * hidden[i];
        out[o] = a;
    }
}

double log_sum_exp(std::span<const double> v) {
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

GaussianMixture MixtureDensityCcf::mixture_at(std::span<const double> x) const {
    const Layout L{dim_, hidden_, components_};
    std::vector<double> hidden, out;
    forward(L, params_, x, hidden, out);
    GaussianMixture g;
    std::span<const double> logits(out.data(), L.k);
    const double lse = log_sum_exp(logits);
    g.weights.resize(L.k);
    for (std::size_t c = 0; c < L.k; ++c) g.weights[c] = std::exp(logits[c] - lse);
    g.means.assign(out.begin() + static_cast<std::ptrdiff_t>(L.k),
                   out.begin() + static_cast<std::ptrdiff_t>(L.k + L.k * L.d));
    g.sigmas.resize(L.k * L.d);
    for (std::size_t i = 0; i < L.k * L.d; ++i) {
        g.sigmas[i] = std::exp(std::clamp(out[L.k + L.k * L.d + i], kLogSigmaMin, kLogSigmaMax));
    }
    return g;
}

Complex MixtureDensityCcf::do_evaluate(std::span<const double> freq,
                                       std::span<const double> x) const {
    const GaussianMixture g = mixture_at(x);
    double re = 0.0, im = 0.0, den = 0.0;
    for (std::size_t c = 0; c < components_; ++c) {
        double phase = 0.0, quad = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            phase += freq[j] * g.means[c * dim_ + j];
            const double fs = freq[j] * g.sigmas[c * dim_ + j];
            quad += fs * fs;
        }
        const double amp = g.weights[c] * std::exp(-0.5 * quad);
        const Complex e = unit_phase(phase);
        re += amp * e.real();
        im += amp * e.imag();
        den += g.weights[c];
    }
    return {re / den, im / den};
}

MixtureDensityCcf fit_mixture_density(const Trajectory& traj, Direction direction,
                                      const MdnConfig& config) {
    if (config.components == 0) throw Error(Errc::InvalidInput, "components must be >= 1");
    if (config.hidden == 0 || config.epochs == 0 || !(config.learning_rate > 0.0)) {
        throw Error(Errc::InvalidInput, "hidden, epochs and learning_rate must be positive");
    }
    if (traj.length() < 10 * config.components) {
        throw Error(Errc::InsufficientData,
                    "mixture density fit needs T >= 10 * components, got T = " +
                        std::to_string(traj.length()));
    }
    const Layout L{traj.dim(), config.hidden, config.components};
    const std::size_t n = traj.length() - 1;
    auto cond_of = [&](std::size_t i) {
        return direction == Direction::Forward ? traj.state(i) : traj.state(i + 1);
    };
    auto targ_of = [&](std::size_t i) {
        return direction == Direction::Forward ? traj.state(i + 1) : traj.state(i);
    };

    MixtureDensityCcf model;
    model.direction_ = direction;
    model.dim_ = L.d;
    model.components_ = L.k;
    model.hidden_ = L.h;
    model.params_.assign(L.size(), 0.0);

    std::mt19937_64 rng(config.seed);
    const double lim1 = std::sqrt(6.0 / static_cast<double>(L.d + L.h));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(L.h + L.out()));
    std::uniform_real_distribution<double> u1(-lim1, lim1), u2(-lim2, lim2);
    for (std::size_t i = 0; i < L.h * L.d; ++i) model.params_[L.w1() + i] = u1(rng);
    for (std::size_t i = 0; i < L.out() * L.h; ++i) model.params_[L.wo() + i] = 0.1 * u2(rng);
    // Spread the initial component means so they do not start identical.
    for (std::size_t c = 0; c < L.k; ++c) {
        for (std::size_t j = 0; j < L.d; ++j) {
            model.params_[L.bo() + L.k + c * L.d + j] =
                L.k == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(c) / static_cast<double>(L.k - 1);
        }
    }

    std::vector<double> grad(L.size()), m1(L.size(), 0.0), m2(L.size(), 0.0);
    std::vector<double> hidden, out, dout(L.out()), dh(L.h), logp(L.k), gamma(L.k);
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    double loss = 0.0;

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        loss = 0.0;
        for (std::size_t s = 0; s < n; ++s) {
            auto x = cond_of(s);
            auto y = targ_of(s);
            forward(L, model.params_, x, hidden, out);
            std::span<const double> logits(out.data(), L.k);
            const double lse_logits = log_sum_exp(logits);
            for (std::size_t c = 0; c < L.k; ++c) {
                double lp = logits[c] - lse_logits;
                for (std::size_t j = 0; j < L.d; ++j) {
                    const double mu = out[L.k + c * L.d + j];
                    const double ls =
                        std::clamp(out[L.k + L.k * L.d + c * L.d + j], kLogSigmaMin, kLogSigmaMax);
                    const double z = (y[j] - mu) * std::exp(-ls);
                    lp += -0.5 * z * z - ls - half_log_2pi;
                }
                logp[c] = lp;
            }
            const double lse = log_sum_exp(logp);
            loss -= lse;
            for (std::size_t c = 0; c < L.k; ++c) gamma[c] = std::exp(logp[c] - lse);

            for (std::size_t c = 0; c < L.k; ++c) {
                dout[c] = std::exp(logits[c] - lse_logits) - gamma[c];
                for (std::size_t j = 0; j < L.d; ++j) {
                    const double mu = out[L.k + c * L.d + j];
                    const double raw_ls = out[L.k + L.k * L.d + c * L.d + j];
                    const double ls = std::clamp(raw_ls, kLogSigmaMin, kLogSigmaMax);
                    const double inv_var = std::exp(-2.0 * ls);
                    const double r = y[j] - mu;
                    dout[L.k + c * L.d + j] = -gamma[c] * r * inv_var;
                    const bool clamped = raw_ls < kLogSigmaMin || raw_ls > kLogSigmaMax;
                    dout[L.k + L.k * L.d + c * L.d + j] =
                        clamped ? 0.0 : -gamma[c] * (r * r * inv_var - 1.0);
                }
            }
            std::fill(dh.begin(), dh.end(), 0.0);
            for (std::size_t o = 0; o < L.out(); ++o) {
                grad[L.bo() + o] += dout[o];
                for (std::size_t i = 0; i < L.h; ++i) {
                    grad[L.wo() + o * L.h + i] += dout[o] * hidden[i];
                    dh[i] += dout[o] * model.params_[L.wo() + o * L.h + i];
                }
            }
            for (std::size_t i = 0; i < L.h; ++i) {
                const double da = dh[i] * (1.0 - hidden[i] * hidden[i]);
                grad[L.b1() + i] += da;
                for (std::size_t j = 0; j < L.d; ++j) grad[L.w1() + i * L.d + j] += da * x[j];
            }
        }
        loss /= static_cast<double>(n);
        if (!std::isfinite(loss)) {
            throw Error(Errc::TrainingDiverged,
                        "non-finite loss at epoch " + std::to_string(epoch));
        }
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(epoch));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(epoch));
        for (std::size_t i = 0; i < L.size(); ++i) {
            const double g = grad[i] / static_cast<double>(n);
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
            model.params_[i] -=
                config.learning_rate * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps);
        }
    }
    model.final_loss_ = loss;
    return model;
}

}  // namespace markov
