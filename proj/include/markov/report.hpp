#pragma once

#include "markov/cohort_stats.hpp"

#include <string>
#include <utility>
#include <vector>

namespace markov {

struct HistogramSpec {
    int k_max = 0;
    std::vector<std::size_t> counts;    // counts[k-1] = #{order == k}
    std::vector<double> frequencies;    // counts / n; all zero when n == 0
};

/// Quartiles use linear interpolation between closest ranks (type 7).
/// min/max are the extremes of the non-outlier values; outliers lie
/// outside [q1 - 1.5 IQR, q3 + 1.5 IQR].
struct BoxStats {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    std::vector<double> outliers;
};

struct DensityCurve {
    double bandwidth = 0.0;
    std::vector<double> x;
    std::vector<double> density;
};

HistogramSpec order_histogram(const std::vector<int>& orders, int k_max);
BoxStats boxplot_stats(const std::vector<int>& orders);
/// Type-7 quantile of already sorted data, p in [0, 1].
double quantile_type7(const std::vector<double>& sorted, double p);

/// Gaussian KDE with Silverman bandwidth (0.5 when the sample has no
/// spread), evaluated on `points` evenly spaced points over [lo, hi].
DensityCurve order_density(const std::vector<int>& orders, double lo, double hi,
                           std::size_t points = 101);

enum class TableFormat { Markdown, Csv, Json };

struct CohortComparison {
    std::string label;  // e.g. "HV vs AV"
    TTestResult t;
    FTestResult f;
};

/// Column-stable summary table: one row per cohort (mean, std, %MP, %HOMP at
/// two decimals), then one row per comparison (t, p, F, p at four decimals).
/// The comparison "p" columns are the two-tailed t probability and CDF_F,
/// matching how published summary tables usually report them; the JSON form
/// carries every probability.
std::string render_summary(const std::vector<std::pair<std::string, CohortSummary>>& cohorts,
                           const std::vector<CohortComparison>& comparisons, TableFormat format);

std::string histogram_csv(const HistogramSpec& hist);
std::string boxstats_json(const BoxStats& box);
std::string density_csv(const DensityCurve& curve);

}  // namespace markov
