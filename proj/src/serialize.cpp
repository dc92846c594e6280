#include "markov/serialize.hpp"

#include "markov/error.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace markov {

std::string estimator_name(EstimatorKind kind) {
    return kind == EstimatorKind::Kernel ? "kernel" : "mdn";
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "kernel") return EstimatorKind::Kernel;
    if (name == "mdn") return EstimatorKind::MixtureDensity;
    throw Error(Errc::InvalidConfig, "unknown estimator '" + name + "'");
}

Json to_json(const TestConfig& cfg) {
    Json j;
    j["alpha"] = cfg.alpha;
    j["k_max"] = cfg.k_max;
    j["n_freqs"] = cfg.n_freqs;
    j["n_bootstrap"] = cfg.n_bootstrap;
    j["min_effective_length"] = cfg.min_effective_length;
    j["seed"] = cfg.rng_seed;
    j["estimator"] = estimator_name(cfg.estimator);
    j["bandwidth"] = cfg.bandwidth ? Json(*cfg.bandwidth) : Json(nullptr);
    if (cfg.estimator == EstimatorKind::MixtureDensity) {
        j["mdn"] = {{"components", cfg.mdn.components},
                    {"hidden", cfg.mdn.hidden},
                    {"epochs", cfg.mdn.epochs},
                    {"learning_rate", cfg.mdn.learning_rate},
                    {"seed", cfg.mdn.seed}};
    }
    j["full_trace"] = cfg.full_trace;
    j["lag_rule"] = "order k tested at lag k+1";
    return j;
}

Json to_json(const MarkovTestResult& r) {
    return Json{{"k", r.k},
                {"lag", r.lag},
                {"sup_stat", r.sup_stat},
                {"p_value", r.p_value},
                {"reject", r.reject},
                {"n_effective", r.n_effective}};
}

Json to_json(const OrderEstimate& est) {
    Json j;
    j["order"] = est.order;
    j["capped"] = est.capped;
    j["k_max"] = est.k_max;
    j["alpha"] = est.alpha;
    j["per_lag"] = Json::array();
    for (const auto& r : est.per_lag) j["per_lag"].push_back(to_json(r));
    return j;
}

Json to_json(const BatchItem& item) {
    Json j;
    j["id"] = item.trajectory_id;
    j["metadata"] = Json::object();
    for (const auto& [k, v] : item.metadata) j["metadata"][k] = v;
    if (item.estimate) {
        j["estimate"] = to_json(*item.estimate);
    } else {
        j["error"] = item.error;
    }
    return j;
}

Json to_json(const CohortSummary& s) {
    return Json{{"n", s.n},
                {"mean", s.mean},
                {"std", s.stddev},
                {"pct_mp", s.pct_mp},
                {"pct_homp", s.pct_homp}};
}

Json to_json(const TTestResult& t) {
    return Json{{"t", t.t},
                {"df", t.df},
                {"p_one_tailed", t.p_one_tailed},
                {"p_two_tailed", t.p_two_tailed},
                {"significant", t.significant}};
}

Json to_json(const FTestResult& f) {
    return Json{{"F", f.f},
                {"df_num", f.df_num},
                {"df_den", f.df_den},
                {"cdf", f.cdf},
                {"upper_tail_prob", f.upper_tail_prob},
                {"significant", f.significant}};
}

OrderEstimate order_estimate_from_json(const nlohmann::json& j) {
    OrderEstimate est;
    est.order = j.at("order").get<int>();
    est.capped = j.at("capped").get<bool>();
    est.k_max = j.at("k_max").get<int>();
    est.alpha = j.at("alpha").get<double>();
    for (const auto& r : j.at("per_lag")) {
        MarkovTestResult m;
        m.k = r.at("k").get<int>();
        m.lag = r.at("lag").get<std::size_t>();
        m.sup_stat = r.at("sup_stat").get<double>();
        m.p_value = r.at("p_value").get<double>();
        m.reject = r.at("reject").get<bool>();
        m.n_effective = r.at("n_effective").get<std::size_t>();
        est.per_lag.push_back(m);
    }
    return est;
}

BatchItem batch_item_from_json(const nlohmann::json& j) {
    BatchItem item;
    item.trajectory_id = j.at("id").get<std::string>();
    if (j.contains("metadata")) {
        for (const auto& [k, v] : j.at("metadata").items()) item.metadata[k] = v.get<std::string>();
    }
    if (j.contains("estimate")) {
        item.estimate = order_estimate_from_json(j.at("estimate"));
    } else {
        item.error = j.value("error", std::string("unknown error"));
    }
    return item;
}

std::string results_json(const TestConfig& cfg, std::vector<BatchItem> items) {
    std::sort(items.begin(), items.end(), [](const BatchItem& a, const BatchItem& b) {
        return a.trajectory_id < b.trajectory_id;
    });
    Json j;
    j["config"] = to_json(cfg);
    j["trajectories"] = Json::array();
    for (const auto& item : items) j["trajectories"].push_back(to_json(item));
    return j.dump(2) + "\n";
}

std::vector<BatchItem> read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, "cannot open results file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto j = nlohmann::json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("trajectories")) {
        throw Error(Errc::SchemaMismatch, path.string() + " is not a results document");
    }
    std::vector<BatchItem> items;
    try {
        for (const auto& t : j.at("trajectories")) items.push_back(batch_item_from_json(t));
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::SchemaMismatch, path.string() + ": " + e.what());
    }
    return items;
}

}  // namespace markov
