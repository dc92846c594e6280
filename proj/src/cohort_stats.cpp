#include "markov/cohort_stats.hpp"

#include "markov/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace markov {

namespace {

// Continued fraction for I_x(a, b), valid (fast) for x < (a+1)/(a+b+2).
double beta_continued_fraction(double x, double a, double b) {
    constexpr int kMaxIter = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

// I_x(a, b) with 1 - x supplied separately so callers can pass it without
// cancellation.
double ibeta(double x, double y, double a, double b) {
    if (x <= 0.0) return 0.0;
    if (y <= 0.0) return 1.0;
    const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                             a * std::log(x) + b * std::log(y);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(x, a, b) / a;
    return 1.0 - front * beta_continued_fraction(y, b, a) / b;
}

void require_cohort(const SampleStats& s, const char* which) {
    if (s.n == 0) throw Error(Errc::EmptyCohort, std::string(which) + " cohort is empty");
    if (s.n < 2) {
        throw Error(Errc::InsufficientData, std::string(which) + " cohort needs n >= 2");
    }
}

}  // namespace

double reg_inc_beta(double x, double a, double b) {
    if (!(x >= 0.0 && x <= 1.0) || !(a > 0.0) || !(b > 0.0) || !std::isfinite(a) ||
        !std::isfinite(b)) {
        throw Error(Errc::DomainError, "reg_inc_beta(" + std::to_string(x) + ", " +
                                           std::to_string(a) + ", " + std::to_string(b) + ")");
    }
    return ibeta(x, 1.0 - x, a, b);
}

double t_cdf(double x, double df) {
    if (!(df >= 1.0) || !std::isfinite(df)) {
        throw Error(Errc::InvalidDf, "t distribution needs df >= 1, got " + std::to_string(df));
    }
    if (std::isnan(x)) throw Error(Errc::InvalidInput, "t_cdf of NaN");
    if (x == 0.0) return 0.5;
    if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
    // P(|T| <= |x|) = I_{x^2/(df+x^2)}(1/2, df/2)
    const double x2 = x * x;
    const double central = ibeta(x2 / (df + x2), df / (df + x2), 0.5, 0.5 * df);
    return x > 0.0 ? 0.5 + 0.5 * central : 0.5 - 0.5 * central;
}

double f_cdf(double x, double df1, double df2) {
    if (!(df1 >= 1.0) || !(df2 >= 1.0) || !std::isfinite(df1) || !std::isfinite(df2) ||
        std::isnan(x)) {
        throw Error(Errc::InvalidInput, "f_cdf needs dfs >= 1 and a numeric x");
    }
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double denom = df1 * x + df2;
    return ibeta(df1 * x / denom, df2 / denom, 0.5 * df1, 0.5 * df2);
}

SampleStats sample_stats(std::span<const int> orders) {
    SampleStats s;
    s.n = orders.size();
    if (s.n == 0) return s;
    double sum = 0.0;
    for (int k : orders) sum += k;
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (int k : orders) ss += (k - s.mean) * (k - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

CohortSummary summarize_orders(std::span<const int> orders) {
    if (orders.empty()) throw Error(Errc::EmptyCohort, "no orders to summarize");
    for (int k : orders) {
        if (k < 1) throw Error(Errc::OutOfRangeOrder, "order " + std::to_string(k) + " < 1");
    }
    const SampleStats s = sample_stats(orders);
    const auto mp = std::count(orders.begin(), orders.end(), 1);
    CohortSummary out;
    out.n = s.n;
    out.mean = s.mean;
    out.stddev = s.stddev;
    out.pct_mp = 100.0 * static_cast<double>(mp) / static_cast<double>(s.n);
    out.pct_homp = 100.0 * static_cast<double>(static_cast<long>(s.n) - mp) /
                   static_cast<double>(s.n);
    return out;
}

TTestResult pooled_t_test(const SampleStats& a, const SampleStats& b, double threshold) {
    require_cohort(a, "first");
    require_cohort(b, "second");
    const double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    const double pooled_var =
        ((na - 1.0) * a.stddev * a.stddev + (nb - 1.0) * b.stddev * b.stddev) / (na + nb - 2.0);
    if (!(pooled_var > 0.0)) throw Error(Errc::ZeroPooledVariance, "both cohorts are constant");
    TTestResult r;
    r.df = static_cast<int>(a.n + b.n - 2);
    r.t = (a.mean - b.mean) / (std::sqrt(pooled_var) * std::sqrt(1.0 / na + 1.0 / nb));
    const double cdf = t_cdf(r.t, r.df);
    r.p_one_tailed = 1.0 - cdf;
    r.p_two_tailed = std::min(1.0, 2.0 * std::min(cdf, 1.0 - cdf));
    r.significant = r.t > 0.0 && r.p_one_tailed < threshold;
    return r;
}

TTestResult pooled_t_test(std::span<const int> a, std::span<const int> b, double threshold) {
    return pooled_t_test(sample_stats(a), sample_stats(b), threshold);
}

FTestResult f_test(const SampleStats& a, const SampleStats& b, double threshold) {
    require_cohort(a, "first");
    require_cohort(b, "second");
    if (!(b.stddev > 0.0)) {
        throw Error(Errc::ZeroDenominatorVariance, "second cohort has zero variance");
    }
    FTestResult r;
    r.f = (a.stddev * a.stddev) / (b.stddev * b.stddev);
    r.df_num = static_cast<int>(a.n - 1);
    r.df_den = static_cast<int>(b.n - 1);
    r.cdf = f_cdf(r.f, r.df_num, r.df_den);
    r.upper_tail_prob = 1.0 - r.cdf;
    r.significant = r.upper_tail_prob < threshold;
    return r;
}

FTestResult f_test(std::span<const int> a, std::span<const int> b, double threshold) {
    return f_test(sample_stats(a), sample_stats(b), threshold);
}

}  // namespace markov
