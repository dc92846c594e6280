#pragma once

#include "markov/cohort_stats.hpp"
#include "markov/markov_test.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace markov {

using Json = nlohmann::ordered_json;

Json to_json(const TestConfig& cfg);
Json to_json(const MarkovTestResult& r);
Json to_json(const OrderEstimate& est);
Json to_json(const BatchItem& item);
Json to_json(const CohortSummary& s);
Json to_json(const TTestResult& t);
Json to_json(const FTestResult& f);

OrderEstimate order_estimate_from_json(const nlohmann::json& j);
BatchItem batch_item_from_json(const nlohmann::json& j);

/// Results document: the test configuration and one entry per trajectory,
/// sorted by trajectory id. Contains nothing run-dependent (no timings,
/// thread counts or paths), so equal inputs and seeds give equal bytes.
std::string results_json(const TestConfig& cfg, std::vector<BatchItem> items);

/// Reads a results document. Throws FileNotFound or SchemaMismatch.
std::vector<BatchItem> read_results(const std::filesystem::path& path);

std::string estimator_name(EstimatorKind kind);
EstimatorKind parse_estimator(const std::string& name);

}  // namespace markov
