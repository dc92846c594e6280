#include "markov/report.hpp"

#include "markov/error.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace markov {

namespace {

std::string fixed2(double v) { return fmt::format("{:.2f}", v); }
std::string fixed4(double v) { return fmt::format("{:.4f}", v); }

// Fixed-precision numbers go into JSON as numbers parsed back from their
// rounded text, so the JSON view agrees with the other two formats.
double rounded(double v, int places) {
    const std::string text = fmt::format("{:.{}f}", v, places);
    double out = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), out);
    return out;
}

}  // namespace

HistogramSpec order_histogram(const std::vector<int>& orders, int k_max) {
    if (k_max < 1) throw Error(Errc::InvalidInput, "k_max must be >= 1");
    HistogramSpec h;
    h.k_max = k_max;
    h.counts.assign(static_cast<std::size_t>(k_max), 0);
    for (int k : orders) {
        if (k < 1 || k > k_max) {
            throw Error(Errc::OutOfRangeOrder,
                        fmt::format("order {} outside 1..{}", k, k_max));
        }
        ++h.counts[static_cast<std::size_t>(k - 1)];
    }
    h.frequencies.assign(h.counts.size(), 0.0);
    if (!orders.empty()) {
        for (std::size_t i = 0; i < h.counts.size(); ++i) {
            h.frequencies[i] = static_cast<double>(h.counts[i]) / static_cast<double>(orders.size());
        }
    }
    return h;
}

double quantile_type7(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw Error(Errc::EmptyInput, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats boxplot_stats(const std::vector<int>& orders) {
    if (orders.empty()) throw Error(Errc::EmptyCohort, "box plot of an empty cohort");
    std::vector<double> v(orders.begin(), orders.end());
    std::sort(v.begin(), v.end());
    BoxStats b;
    b.q1 = quantile_type7(v, 0.25);
    b.median = quantile_type7(v, 0.5);
    b.q3 = quantile_type7(v, 0.75);
    const double iqr = b.q3 - b.q1;
    const double lo_fence = b.q1 - 1.5 * iqr, hi_fence = b.q3 + 1.5 * iqr;
    bool any_inlier = false;
    for (double x : v) {
        if (x < lo_fence || x > hi_fence) {
            b.outliers.push_back(x);
        } else {
            if (!any_inlier) b.min = x;
            b.max = x;
            any_inlier = true;
        }
    }
    return b;
}

DensityCurve order_density(const std::vector<int>& orders, double lo, double hi,
                           std::size_t points) {
    if (orders.empty()) throw Error(Errc::EmptyCohort, "density of an empty cohort");
    if (points < 2 || !(hi > lo)) throw Error(Errc::InvalidInput, "density grid needs hi > lo");
    const double n = static_cast<double>(orders.size());
    const SampleStats s = sample_stats(orders);
    DensityCurve c;
    c.bandwidth = s.stddev > 0.0 ? 1.06 * s.stddev * std::pow(n, -0.2) : 0.5;
    const double norm = 1.0 / (n * c.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        double acc = 0.0;
        for (int k : orders) {
            const double z = (x - k) / c.bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        c.x.push_back(x);
        c.density.push_back(acc * norm);
    }
    return c;
}

std::string render_summary(const std::vector<std::pair<std::string, CohortSummary>>& cohorts,
                           const std::vector<CohortComparison>& comparisons, TableFormat format) {
    std::string out;
    switch (format) {
    case TableFormat::Markdown:
        out += "| Cohort | n | Mean order (s) | Std (s) | %MP | %HOMP |\n";
        out += "|---|---|---|---|---|---|\n";
        for (const auto& [label, c] : cohorts) {
            out += fmt::format("| {} | {} | {} | {} | {} | {} |\n", label, c.n, fixed2(c.mean),
                               fixed2(c.stddev), fixed2(c.pct_mp), fixed2(c.pct_homp));
        }
        if (!comparisons.empty()) {
            out += "\n| Comparison | t | p (t) | F | p (F) |\n";
            out += "|---|---|---|---|---|\n";
            for (const auto& cmp : comparisons) {
                out += fmt::format("| {} | {} | {} | {} | {} |\n", cmp.label, fixed4(cmp.t.t),
                                   fixed4(cmp.t.p_two_tailed), fixed4(cmp.f.f),
                                   fixed4(cmp.f.cdf));
            }
        }
        break;
    case TableFormat::Csv:
        out += "cohort,n,mean,std,pct_mp,pct_homp\n";
        for (const auto& [label, c] : cohorts) {
            out += fmt::format("{},{},{},{},{},{}\n", label, c.n, fixed2(c.mean), fixed2(c.stddev),
                               fixed2(c.pct_mp), fixed2(c.pct_homp));
        }
        if (!comparisons.empty()) {
            out += "comparison,t,p_t,F,p_F\n";
            for (const auto& cmp : comparisons) {
                out += fmt::format("{},{},{},{},{}\n", cmp.label, fixed4(cmp.t.t),
                                   fixed4(cmp.t.p_two_tailed), fixed4(cmp.f.f), fixed4(cmp.f.cdf));
            }
        }
        break;
    case TableFormat::Json: {
        nlohmann::ordered_json j;
        j["cohorts"] = nlohmann::ordered_json::array();
        for (const auto& [label, c] : cohorts) {
            j["cohorts"].push_back({{"label", label},
                                    {"n", c.n},
                                    {"mean", rounded(c.mean, 2)},
                                    {"std", rounded(c.stddev, 2)},
                                    {"pct_mp", rounded(c.pct_mp, 2)},
                                    {"pct_homp", rounded(c.pct_homp, 2)}});
        }
        j["comparisons"] = nlohmann::ordered_json::array();
        for (const auto& cmp : comparisons) {
            j["comparisons"].push_back(
                {{"label", cmp.label},
                 {"t", rounded(cmp.t.t, 4)},
                 {"df", cmp.t.df},
                 {"p_t_one_tailed", rounded(cmp.t.p_one_tailed, 4)},
                 {"p_t_two_tailed", rounded(cmp.t.p_two_tailed, 4)},
                 {"t_significant", cmp.t.significant},
                 {"F", rounded(cmp.f.f, 4)},
                 {"df_num", cmp.f.df_num},
                 {"df_den", cmp.f.df_den},
                 {"cdf_F", rounded(cmp.f.cdf, 4)},
                 {"p_F_upper_tail", rounded(cmp.f.upper_tail_prob, 4)},
                 {"F_significant", cmp.f.significant}});
        }
        out = j.dump(2) + "\n";
        break;
    }
    }
    return out;
}

std::string histogram_csv(const HistogramSpec& hist) {
    std::string out = "order,count,frequency\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        out += fmt::format("{},{},{}\n", i + 1, hist.counts[i], hist.frequencies[i]);
    }
    return out;
}

std::string boxstats_json(const BoxStats& box) {
    nlohmann::ordered_json j{{"quantile_method", "type7_linear"},
                             {"min", box.min},
                             {"q1", box.q1},
                             {"median", box.median},
                             {"q3", box.q3},
                             {"max", box.max},
                             {"outliers", box.outliers}};
    return j.dump(2) + "\n";
}

std::string density_csv(const DensityCurve& curve) {
    std::string out = fmt::format("# bandwidth={}\nx,density\n", curve.bandwidth);
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        out += fmt::format("{},{}\n", curve.x[i], curve.density[i]);
    }
    return out;
}

}  // namespace markov
