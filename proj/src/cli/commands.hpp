#pragma once

#include "markov/ingest.hpp"
#include "markov/markov_test.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace markov::cli {

namespace fs = std::filesystem;

struct Context {
    std::uint64_t seed = 0;
    unsigned jobs = 1;
    fs::path out = ".";
    int verbosity = 0;
    std::ostream* out_stream = nullptr;
    std::ostream* err_stream = nullptr;

    std::ostream& out_s() const { return *out_stream; }
    std::ostream& log() const { return *err_stream; }
};

struct IngestOptions {
    std::vector<fs::path> inputs;
    IngestConfig cfg;
    std::string mode = "fixed";
    std::string schema = "auto";
    std::string cohort;
    std::string scenario;
};

struct TestOptions {
    fs::path input;
    TestConfig cfg;
    std::string estimator = "kernel";
};

struct SynthOptions {
    fs::path spec;
    std::size_t count = 1;
    std::optional<std::size_t> length;
};

struct CompareOptions {
    std::vector<fs::path> inputs;
    std::string group_by;
    std::vector<std::string> labels;
    double threshold = 0.05;
};

struct CalibrateOptions {
    fs::path spec;
    std::size_t replications = 100;
    std::optional<std::size_t> length;
    TestConfig cfg;
    std::string estimator = "kernel";
    std::vector<double> size_band{0.01, 0.12};
    double min_recovery = 0.6;
};

struct ReportOptions {
    std::vector<fs::path> inputs;
    std::string group_by;
    std::vector<std::string> labels;
    std::optional<double> alpha;
    int kmax = 0;
};

int cmd_ingest(const IngestOptions& opt, const Context& ctx);
int cmd_test(const TestOptions& opt, const Context& ctx);
int cmd_synth(const SynthOptions& opt, const Context& ctx);
int cmd_compare(const CompareOptions& opt, const Context& ctx);
int cmd_calibrate(const CalibrateOptions& opt, const Context& ctx);
int cmd_report(const ReportOptions& opt, const Context& ctx);

/// Synthetic-process description read from a JSON document with a "kind"
/// of "iid", "var", "chain" or "hidden".
struct SynthSpec {
    std::string kind;
    std::size_t length = 500;
    std::string id_prefix;
    nlohmann::json body;
};

SynthSpec load_synth_spec(const fs::path& path);
Trajectory generate(const SynthSpec& spec, std::size_t length, std::uint64_t seed,
                    const std::string& id);

/// Wilson score interval for k successes in n trials.
std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

}  // namespace markov::cli
