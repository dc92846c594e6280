#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace markov {

/// Markov-order distribution of one cohort. Orders are in sampling steps
/// (seconds at a 1 s resampling interval).
struct CohortSummary {
    std::size_t n = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample std, n - 1 divisor
    double pct_mp = 0.0;   // % with order == 1
    double pct_homp = 0.0; // % with order > 1
};

/// (mean, sample std, n) triple, enough to run both cohort tests from
/// published summary tables.
struct SampleStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

/// Pooled two-sample t-test of cohort A (numerator side, e.g. HV) against
/// cohort B (e.g. AV). `p_one_tailed` = 1 - CDF_t(t, df) is the upper-tail
/// probability; `p_two_tailed` = 2 * min(CDF, 1 - CDF) is what the summary
/// tables of the source study report. significant <=> t > 0 and
/// p_one_tailed < threshold.
struct TTestResult {
    double t = 0.0;
    int df = 0;
    double p_one_tailed = 0.5;
    double p_two_tailed = 1.0;
    bool significant = false;
};

/// Variance-ratio test F = S_A^2 / S_B^2 with (n_A - 1, n_B - 1) degrees of
/// freedom. `cdf` is CDF_F(F) (the "p" of the source tables);
/// `upper_tail_prob` is 1 - cdf. significant <=> upper_tail_prob < threshold.
struct FTestResult {
    double f = 0.0;
    int df_num = 0;
    int df_den = 0;
    double cdf = 0.5;
    double upper_tail_prob = 0.5;
    bool significant = false;
};

CohortSummary summarize_orders(std::span<const int> orders);
SampleStats sample_stats(std::span<const int> orders);

TTestResult pooled_t_test(const SampleStats& a, const SampleStats& b, double threshold = 0.05);
TTestResult pooled_t_test(std::span<const int> a, std::span<const int> b,
                          double threshold = 0.05);

FTestResult f_test(const SampleStats& a, const SampleStats& b, double threshold = 0.05);
FTestResult f_test(std::span<const int> a, std::span<const int> b, double threshold = 0.05);

/// Student-t CDF. Throws InvalidDf for df < 1.
double t_cdf(double x, double df);
/// F(df1, df2) CDF; 0 for x <= 0. Throws InvalidInput for df < 1 or
/// non-finite x.
double f_cdf(double x, double df1, double df2);
/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
/// switching to 1 - I_{1-x}(b, a) above x = (a+1)/(a+b+2). Throws
/// DomainError outside x in [0, 1], a > 0, b > 0.
double reg_inc_beta(double x, double a, double b);

}  // namespace markov
