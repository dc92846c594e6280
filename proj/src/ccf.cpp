#include "markov/ccf.hpp"

#include "markov/error.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace markov {

namespace {

void check_dims(std::size_t expected, std::span<const double> freq, std::span<const double> x) {
    if (freq.size() != expected || x.size() != expected) {
        throw Error(Errc::DimensionMismatch,
                    "estimator dimension " + std::to_string(expected) + ", got freq " +
                        std::to_string(freq.size()) + " and x " + std::to_string(x.size()));
    }
}

KernelCcf fit_kernel(const Trajectory& traj, Direction direction,
                     const std::optional<std::vector<double>>& bandwidth) {
    if (traj.length() < 2) throw Error(Errc::InsufficientData, "need at least one pair");
    const std::size_t d = traj.dim();
    const std::size_t n = traj.length() - 1;
    auto all = traj.flat_states();
    std::vector<double> head(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n * d));
    std::vector<double> tail(all.begin() + static_cast<std::ptrdiff_t>(d), all.end());
    std::vector<double> cond = direction == Direction::Forward ? head : tail;
    std::vector<double> targ = direction == Direction::Forward ? tail : head;

    std::vector<double> h;
    if (bandwidth) {
        h = *bandwidth;
        if (h.size() != d) {
            throw Error(Errc::DimensionMismatch, "bandwidth has " + std::to_string(h.size()) +
                                                     " entries, expected " + std::to_string(d));
        }
    } else {
        h = silverman_bandwidth(cond, d);
    }
    return KernelCcf(direction, std::move(cond), std::move(targ), d, std::move(h));
}

}  // namespace

Complex CcfEstimator::evaluate(std::span<const double> freq, std::span<const double> x) const {
    check_dims(dim(), freq, x);
    return do_evaluate(freq, x);
}

std::vector<std::vector<Complex>> CcfEstimator::evaluate_grid(std::span<const StateVector> freqs,
                                                              const Trajectory& points) const {
    if (points.dim() != dim()) {
        throw Error(Errc::DimensionMismatch, "evaluation points have dimension " +
                                                 std::to_string(points.dim()));
    }
    for (const auto& f : freqs) {
        if (f.size() != dim()) throw Error(Errc::DimensionMismatch, "frequency dimension");
    }
    return do_evaluate_grid(freqs, points);
}

std::vector<std::vector<Complex>> CcfEstimator::do_evaluate_grid(
    std::span<const StateVector> freqs, const Trajectory& points) const {
    std::vector<std::vector<Complex>> out(freqs.size(), std::vector<Complex>(points.length()));
    for (std::size_t m = 0; m < freqs.size(); ++m) {
        for (std::size_t s = 0; s < points.length(); ++s) {
            out[m][s] = do_evaluate(freqs[m], points.state(s));
        }
    }
    return out;
}

std::vector<double> silverman_bandwidth(std::span<const double> conditioning, std::size_t dim) {
    const std::size_t n = conditioning.size() / dim;
    const double factor =
        1.06 * std::pow(static_cast<double>(n), -1.0 / (4.0 + static_cast<double>(dim)));
    std::vector<double> h(dim, factor);
    if (n < 2) return h;
    for (std::size_t j = 0; j < dim; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += conditioning[i * dim + j];
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dev = conditioning[i * dim + j] - mean;
            ss += dev * dev;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (sd > 1e-12) h[j] = factor * sd;
    }
    return h;
}

KernelCcf::KernelCcf(Direction direction, std::vector<double> conditioning,
                     std::vector<double> targets, std::size_t dim, std::vector<double> bandwidth)
    : direction_(direction),
      conditioning_(std::move(conditioning)),
      targets_(std::move(targets)),
      dim_(dim),
      bandwidth_(std::move(bandwidth)) {
    if (dim_ == 0 || conditioning_.empty() || conditioning_.size() % dim_ != 0 ||
        targets_.size() != conditioning_.size()) {
        throw Error(Errc::InsufficientData, "kernel estimator needs aligned, nonempty pairs");
    }
    if (bandwidth_.size() != dim_) throw Error(Errc::DimensionMismatch, "bandwidth size");
    inv_bandwidth_.resize(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
        if (!(bandwidth_[j] > 0.0) || !std::isfinite(bandwidth_[j])) {
            throw Error(Errc::NonPositiveBandwidth,
                        "bandwidth[" + std::to_string(j) + "] = " + std::to_string(bandwidth_[j]));
        }
        inv_bandwidth_[j] = 1.0 / bandwidth_[j];
    }
}

double KernelCcf::kernel_weights(std::span<const double> x, std::vector<double>& w) const {
    const std::size_t n = pairs();
    w.resize(n);
    double qmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double* c = conditioning_.data() + i * dim_;
        double q = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            const double z = (x[j] - c[j]) * inv_bandwidth_[j];
            q += z * z;
        }
        w[i] = q;
        qmin = std::min(qmin, q);
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = std::exp(-0.5 * (w[i] - qmin));
        total += w[i];
    }
    return total;
}

// Numerator and denominator are accumulated in the same order so that a zero
// frequency (every phase exactly 1) returns exactly 1 + 0i.
Complex KernelCcf::do_evaluate(std::span<const double> freq, std::span<const double> x) const {
    std::vector<double> w;
    kernel_weights(x, w);
    double re = 0.0, im = 0.0, den = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const Complex e = unit_phase(dot(freq, {targets_.data() + i * dim_, dim_}));
        re += w[i] * e.real();
        im += w[i] * e.imag();
        den += w[i];
    }
    return {re / den, im / den};
}

std::vector<std::vector<Complex>> KernelCcf::do_evaluate_grid(std::span<const StateVector> freqs,
                                                              const Trajectory& points) const {
    const std::size_t n = pairs();
    const std::size_t nf = freqs.size();
    // Target phases, laid out [m][i] as separate re/im planes.
    std::vector<double> cos_t(nf * n), sin_t(nf * n);
    for (std::size_t m = 0; m < nf; ++m) {
        for (std::size_t i = 0; i < n; ++i) {
            const Complex e = unit_phase(dot(freqs[m], {targets_.data() + i * dim_, dim_}));
            cos_t[m * n + i] = e.real();
            sin_t[m * n + i] = e.imag();
        }
    }
    std::vector<std::vector<Complex>> out(nf, std::vector<Complex>(points.length()));
    std::vector<double> w;
    for (std::size_t s = 0; s < points.length(); ++s) {
        kernel_weights(points.state(s), w);
        double den = 0.0;
        for (std::size_t i = 0; i < n; ++i) den += w[i];
        for (std::size_t m = 0; m < nf; ++m) {
            const double* cr = cos_t.data() + m * n;
            const double* ci = sin_t.data() + m * n;
            double re = 0.0, im = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                re += w[i] * cr[i];
                im += w[i] * ci[i];
            }
            out[m][s] = {re / den, im / den};
        }
    }
    return out;
}

KernelCcf fit_forward(const Trajectory& traj, const std::optional<std::vector<double>>& bandwidth) {
    return fit_kernel(traj, Direction::Forward, bandwidth);
}

KernelCcf fit_backward(const Trajectory& traj,
                       const std::optional<std::vector<double>>& bandwidth) {
    return fit_kernel(traj, Direction::Backward, bandwidth);
}

Complex exact_ccf_discrete(const std::vector<std::vector<double>>& transition,
                           const std::vector<StateVector>& embed, std::span<const double> freq,
                           std::size_t state_index) {
    const std::size_t n = transition.size();
    if (state_index >= n) throw Error(Errc::InvalidInput, "state index out of range");
    if (embed.size() != n) throw Error(Errc::DimensionMismatch, "embedding size != state count");
    for (std::size_t i = 0; i < n; ++i) {
        if (transition[i].size() != n) throw Error(Errc::NotStochastic, "matrix is not square");
        double sum = 0.0;
        for (double p : transition[i]) {
            if (!(p >= 0.0)) throw Error(Errc::NotStochastic, "negative transition probability");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw Error(Errc::NotStochastic, "row " + std::to_string(i) + " sums to " +
                                                 std::to_string(sum));
        }
    }
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double p = transition[state_index][j];
        if (p == 0.0) continue;
        if (embed[j].size() != freq.size()) throw Error(Errc::DimensionMismatch, "embedding dim");
        const Complex e = unit_phase(dot(freq, embed[j]));
        re += p * e.real();
        im += p * e.imag();
    }
    return {re, im};
}

Complex empirical_cf(const std::vector<StateVector>& samples, std::span<const double> freq) {
    if (samples.empty()) throw Error(Errc::EmptyInput, "empirical_cf needs at least one sample");
    double re = 0.0, im = 0.0;
    for (const auto& x : samples) {
        if (x.size() != freq.size()) throw Error(Errc::DimensionMismatch, "sample dimension");
        const Complex e = unit_phase(dot(freq, x));
        re += e.real();
        im += e.imag();
    }
    const double n = static_cast<double>(samples.size());
    return {re / n, im / n};
}

Complex empirical_cf(const Trajectory& traj, std::span<const double> freq) {
    if (freq.size() != traj.dim()) throw Error(Errc::DimensionMismatch, "frequency dimension");
    double re = 0.0, im = 0.0;
    for (std::size_t t = 0; t < traj.length(); ++t) {
        const Complex e = unit_phase(dot(freq, traj.state(t)));
        re += e.real();
        im += e.imag();
    }
    const double n = static_cast<double>(traj.length());
    return {re / n, im / n};
}

}  // namespace markov
