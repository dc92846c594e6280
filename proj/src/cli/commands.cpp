#include "commands.hpp"

#include "markov/cohort_stats.hpp"
#include "markov/error.hpp"
#include "markov/hash.hpp"
#include "markov/report.hpp"
#include "markov/serialize.hpp"
#include "markov/synthetic.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace markov::cli {

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::FileNotFound, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::FileNotFound, "cannot write " + path.string());
    out << text;
}

template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers <= 1) {
        worker();
        return;
    }
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
    if (!j.is_array() || j.empty()) throw Error(Errc::InvalidInput, "expected a matrix");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 1);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array()) {
            if (cols != 1) throw Error(Errc::DimensionMismatch, "ragged matrix");
            m(r, 0) = row.get<double>();
            continue;
        }
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw Error(Errc::DimensionMismatch, "ragged matrix");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

std::vector<StateVector> rows_from_json(const nlohmann::json& j) {
    std::vector<StateVector> rows;
    for (const auto& r : j) {
        if (r.is_number()) {
            rows.push_back({r.get<double>()});
        } else {
            rows.push_back(r.get<std::vector<double>>());
        }
    }
    return rows;
}

struct Cohort {
    std::string label;
    std::vector<int> orders;
    std::size_t failed = 0;
    int k_max = 0;
};

std::string label_for_file(const fs::path& p) {
    const std::string stem = p.stem().string();
    if ((stem == "results" || stem.empty()) && p.has_parent_path() &&
        !p.parent_path().filename().empty()) {
        return p.parent_path().filename().string();
    }
    return stem;
}

void add_item(Cohort& c, const BatchItem& item, std::optional<double> alpha) {
    if (!item.estimate) {
        ++c.failed;
        return;
    }
    const OrderEstimate est = alpha ? reselect_order(*item.estimate, *alpha) : *item.estimate;
    c.orders.push_back(est.order);
    c.k_max = std::max(c.k_max, est.k_max);
}

// Cohorts from results files: one cohort per file, or every file pooled
// and split by a metadata key. `labels` selects and orders cohorts.
std::vector<Cohort> load_cohorts(const std::vector<fs::path>& inputs, const std::string& group_by,
                                 const std::vector<std::string>& labels,
                                 std::optional<double> alpha) {
    std::vector<Cohort> cohorts;
    for (const auto& p : inputs) {
        if (!fs::exists(p)) {
            throw Error(Errc::EmptyCohort, "results file not found: " + p.string());
        }
    }
    if (group_by.empty()) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            Cohort c;
            c.label = i < labels.size() ? labels[i] : label_for_file(inputs[i]);
            for (const auto& item : read_results(inputs[i])) add_item(c, item, alpha);
            cohorts.push_back(std::move(c));
        }
    } else {
        std::map<std::string, Cohort> groups;
        for (const auto& p : inputs) {
            for (const auto& item : read_results(p)) {
                const auto it = item.metadata.find(group_by);
                const std::string key = it == item.metadata.end() ? "unlabeled" : it->second;
                Cohort& c = groups[key];
                c.label = key;
                add_item(c, item, alpha);
            }
        }
        if (labels.empty()) {
            for (auto& [k, c] : groups) cohorts.push_back(std::move(c));
        } else {
            for (const auto& l : labels) {
                auto it = groups.find(l);
                if (it == groups.end()) {
                    throw Error(Errc::EmptyCohort,
                                fmt::format("no trajectories with {} = '{}'", group_by, l));
                }
                cohorts.push_back(std::move(it->second));
            }
        }
    }
    for (const auto& c : cohorts) {
        if (c.orders.empty()) {
            throw Error(Errc::EmptyCohort, "cohort '" + c.label + "' has no successful estimates");
        }
    }
    return cohorts;
}

std::string safe_name(const std::string& label) {
    std::string s = label;
    for (char& ch : s) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_') ch = '_';
    }
    return s;
}

}  // namespace

std::pair<double, double> wilson_interval(std::size_t k, std::size_t n, double z) {
    if (n == 0) return {0.0, 1.0};
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(k) / nn;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const IngestOptions& opt, const Context& ctx) {
    opt.cfg.validate();
    std::optional<CsvSchema> schema;
    if (opt.schema == "planar") schema = CsvSchema::planar();
    if (opt.schema == "geodetic") schema = CsvSchema::geodetic();

    struct Job {
        fs::path path;
        std::string cohort;
        std::string id;
    };
    std::vector<Job> jobs;
    for (const auto& input : opt.inputs) {
        if (fs::is_directory(input)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::recursive_directory_iterator(input)) {
                if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
            }
            std::sort(files.begin(), files.end());
            for (const auto& f : files) {
                const fs::path rel = fs::relative(f, input);
                std::string cohort = opt.cohort;
                std::string id = f.stem().string();
                if (cohort.empty() && rel.has_parent_path()) {
                    cohort = rel.begin()->string();
                    id = cohort + "_" + id;
                }
                jobs.push_back({f, cohort, id});
            }
        } else {
            jobs.push_back({input, opt.cohort, input.stem().string()});
        }
    }

    struct Outcome {
        std::vector<Trajectory> segments;
        std::string error;
    };
    std::vector<Outcome> outcomes(jobs.size());
    parallel_for(jobs.size(), ctx.jobs, [&](std::size_t i) {
        Metadata meta;
        if (!jobs[i].cohort.empty()) meta["cohort"] = jobs[i].cohort;
        if (!opt.scenario.empty()) meta["scenario"] = opt.scenario;
        try {
            outcomes[i].segments = ingest_file(jobs[i].path, opt.cfg, jobs[i].id, meta, schema);
        } catch (const std::exception& e) {
            outcomes[i].error = e.what();
        }
    });

    Json manifest;
    manifest["config"] = {{"resample_dt", opt.cfg.resample_dt},
                          {"segment_length", opt.cfg.segment_length},
                          {"min_length", opt.cfg.min_length},
                          {"mode", opt.mode},
                          {"trim_head", opt.cfg.trim_head},
                          {"trim_tail", opt.cfg.trim_tail},
                          {"earth_radius", opt.cfg.earth_radius}};
    struct Tally {
        std::size_t files = 0, trajectories = 0;
        double duration = 0.0;
    };
    std::map<std::pair<std::string, std::string>, Tally> tally;
    Json files = Json::array();
    std::set<std::string> written_ids;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        Json f{{"path", jobs[i].path.generic_string()}, {"cohort", jobs[i].cohort}};
        auto& o = outcomes[i];
        if (o.error.empty()) {
            for (const auto& seg : o.segments) {
                if (!written_ids.insert(seg.id()).second) {
                    o.error = "duplicate trajectory id '" + seg.id() + "'";
                    break;
                }
            }
        }
        if (!o.error.empty()) {
            ++failed;
            ctx.log() << "warning: " << jobs[i].path.string() << ": " << o.error << "\n";
            f["status"] = "error";
            f["error"] = o.error;
        } else {
            Tally& t = tally[{jobs[i].cohort.empty() ? "unlabeled" : jobs[i].cohort, opt.scenario}];
            ++t.files;
            for (const auto& seg : o.segments) {
                write_canonical(seg, ctx.out);
                ++t.trajectories;
                t.duration += static_cast<double>(seg.length()) * seg.dt();
            }
            f["status"] = "ok";
            f["segments"] = o.segments.size();
            if (ctx.verbosity > 0) {
                ctx.log() << jobs[i].path.string() << ": " << o.segments.size() << " segments\n";
            }
        }
        files.push_back(std::move(f));
    }
    manifest["cohorts"] = Json::array();
    for (const auto& [key, t] : tally) {
        manifest["cohorts"].push_back({{"cohort", key.first},
                                       {"scenario", key.second},
                                       {"files", t.files},
                                       {"trajectories", t.trajectories},
                                       {"total_duration_s", t.duration}});
    }
    manifest["files"] = std::move(files);
    write_text(ctx.out / "ingest_manifest.json", manifest.dump(2) + "\n");
    std::size_t total = 0;
    for (const auto& [k, t] : tally) total += t.trajectories;
    ctx.out_s() << fmt::format("ingested {} of {} files into {} trajectories\n",
                               jobs.size() - failed, jobs.size(), total);
    return (!jobs.empty() && failed == jobs.size()) ? 2 : 0;
}

// ---------------------------------------------------------------- synth

SynthSpec load_synth_spec(const fs::path& path) {
    const auto j = nlohmann::json::parse(read_text(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw Error(Errc::SchemaMismatch, path.string() + " is not a JSON object");
    }
    SynthSpec s;
    s.kind = j.value("kind", std::string{});
    s.length = j.value("length", std::size_t{500});
    s.id_prefix = j.value("id_prefix", s.kind);
    s.body = j;
    if (s.kind != "iid" && s.kind != "var" && s.kind != "chain" && s.kind != "hidden") {
        throw Error(Errc::InvalidInput, "spec kind must be iid, var, chain or hidden");
    }
    // Fail early on an invalid process description.
    (void)generate(s, std::max<std::size_t>(s.length, 2), 0, "probe");
    return s;
}

Trajectory generate(const SynthSpec& spec, std::size_t length, std::uint64_t seed,
                    const std::string& id) {
    std::mt19937_64 rng(seed);
    const auto& j = spec.body;
    if (spec.kind == "iid") {
        const auto dim = j.value("dim", std::size_t{1});
        if (dim == 0) throw Error(Errc::DimensionMismatch, "dim must be >= 1");
        std::normal_distribution<double> n01;
        std::vector<double> flat(length * dim);
        for (double& v : flat) v = n01(rng);
        return make_trajectory_flat(std::move(flat), dim, 1.0, std::nullopt, id,
                                    {{"generator", "iid"}, {"true_order", "1"}});
    }
    if (spec.kind == "var") {
        VarSpec v;
        for (const auto& a : j.at("coefficients")) v.coefficients.push_back(matrix_from_json(a));
        const auto d = v.coefficients.empty() ? 1 : v.coefficients.front().rows();
        v.noise_cov = j.contains("noise_cov") ? matrix_from_json(j.at("noise_cov"))
                                              : Eigen::MatrixXd::Identity(d, d);
        v.burn_in = j.value("burn_in", v.burn_in);
        return gen_var(v, length, rng).with_id(id);
    }
    if (spec.kind == "chain") {
        ChainSpec c;
        c.order = j.value("order", std::size_t{1});
        c.transition = j.at("transition").get<std::vector<std::vector<double>>>();
        c.embedding = rows_from_json(j.at("embedding"));
        c.burn_in = j.value("burn_in", c.burn_in);
        return gen_chain(c, length, rng).with_id(id);
    }
    const double persistence = j.at("persistence").get<double>();
    return gen_hidden_state(persistence, rows_from_json(j.at("means")), length, rng)
        .trajectory.with_id(id);
}

int cmd_synth(const SynthOptions& opt, const Context& ctx) {
    const SynthSpec spec = load_synth_spec(opt.spec);
    const std::size_t length = opt.length.value_or(spec.length);
    std::vector<Trajectory> trajs;
    for (std::size_t i = 0; i < opt.count; ++i) {
        const std::string id = fmt::format("{}_{:04d}", spec.id_prefix, i);
        trajs.push_back(generate(spec, length, combine_seed(ctx.seed, i), id)
                            .with_metadata("seed", std::to_string(ctx.seed)));
    }
    for (const auto& t : trajs) write_canonical(t, ctx.out);
    ctx.out_s() << fmt::format("wrote {} trajectories to {}\n", trajs.size(), ctx.out.string());
    return 0;
}

// ---------------------------------------------------------------- test

int cmd_test(const TestOptions& opt, const Context& ctx) {
    opt.cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto trajs = load_trajectory_dir(opt.input);
    if (trajs.empty()) {
        throw Error(Errc::EmptyInput, "no canonical trajectories in " + opt.input.string());
    }
    std::set<std::string> ids;
    for (const auto& t : trajs) {
        if (!ids.insert(t.id()).second) {
            throw Error(Errc::InvalidInput, "duplicate trajectory id '" + t.id() + "'");
        }
    }
    const auto items = batch_test(trajs, opt.cfg, ctx.jobs);
    const std::string results = results_json(opt.cfg, items);
    write_text(ctx.out / "results.json", results);

    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(opt.input)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    Json manifest;
    manifest["command"] = "test";
    manifest["seed"] = ctx.seed;
    manifest["config"] = to_json(opt.cfg);
    manifest["config_hash"] = hex64(fnv1a(to_json(opt.cfg).dump()));
    manifest["jobs"] = ctx.jobs;
    manifest["input_dir"] = opt.input.generic_string();
    manifest["inputs"] = Json::array();
    for (const auto& f : files) {
        manifest["inputs"].push_back(
            {{"file", f.filename().string()}, {"fnv1a", hex64(fnv1a(read_text(f)))}});
    }
    manifest["results_fnv1a"] = hex64(fnv1a(results));
    std::size_t failed = 0;
    for (const auto& it : items) failed += it.estimate ? 0 : 1;
    manifest["n_trajectories"] = items.size();
    manifest["n_failed"] = failed;
    manifest["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(ctx.out / "run_manifest.json", manifest.dump(2) + "\n");

    for (const auto& it : items) {
        if (!it.estimate) {
            ctx.log() << "warning: " << it.trajectory_id << ": " << it.error << "\n";
        } else if (ctx.verbosity > 0) {
            ctx.log() << it.trajectory_id << ": order " << it.estimate->order
                      << (it.estimate->capped ? " (capped)" : "") << "\n";
        }
    }
    ctx.out_s() << fmt::format("tested {} trajectories ({} failed); results in {}\n", items.size(),
                               failed, (ctx.out / "results.json").string());
    return 0;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const CompareOptions& opt, const Context& ctx) {
    const auto cohorts = load_cohorts(opt.inputs, opt.group_by, opt.labels, std::nullopt);
    if (cohorts.size() != 2) {
        throw Error(Errc::EmptyCohort,
                    fmt::format("compare needs exactly two cohorts, found {}", cohorts.size()));
    }
    const CohortSummary a = summarize_orders(cohorts[0].orders);
    const CohortSummary b = summarize_orders(cohorts[1].orders);
    CohortComparison cmp;
    cmp.label = cohorts[0].label + " vs " + cohorts[1].label;
    cmp.t = pooled_t_test(cohorts[0].orders, cohorts[1].orders, opt.threshold);
    cmp.f = f_test(cohorts[0].orders, cohorts[1].orders, opt.threshold);

    Json j;
    j["cohorts"] = Json::array();
    for (std::size_t i = 0; i < 2; ++i) {
        Json c = to_json(i == 0 ? a : b);
        c["label"] = cohorts[i].label;
        c["failed"] = cohorts[i].failed;
        j["cohorts"].push_back(std::move(c));
    }
    j["t_test"] = to_json(cmp.t);
    j["f_test"] = to_json(cmp.f);
    j["threshold"] = opt.threshold;
    write_text(ctx.out / "comparison.json", j.dump(2) + "\n");
    const std::string table =
        render_summary({{cohorts[0].label, a}, {cohorts[1].label, b}}, {cmp}, TableFormat::Markdown);
    write_text(ctx.out / "comparison.md", table);
    ctx.out_s() << table;
    return 0;
}

// ---------------------------------------------------------------- calibrate

int cmd_calibrate(const CalibrateOptions& opt, const Context& ctx) {
    if (opt.size_band.size() != 2 || !(opt.size_band[0] <= opt.size_band[1])) {
        throw Error(Errc::InvalidConfig, "--size-band needs lo,hi with lo <= hi");
    }
    TestConfig cfg = opt.cfg;
    cfg.full_trace = true;
    cfg.validate();
    const SynthSpec spec = load_synth_spec(opt.spec);
    const std::size_t length = opt.length.value_or(spec.length);
    std::vector<Trajectory> trajs;
    trajs.reserve(opt.replications);
    for (std::size_t r = 0; r < opt.replications; ++r) {
        trajs.push_back(generate(spec, length, combine_seed(ctx.seed, r), fmt::format("rep_{:05d}", r)));
    }
    const auto items = batch_test(trajs, cfg, ctx.jobs);

    std::optional<int> true_order;
    if (const auto v = trajs.front().meta("true_order"); v && *v != "none") true_order = std::stoi(*v);

    std::map<int, std::pair<std::size_t, std::size_t>> per_k;  // k -> (rejections, tests)
    std::map<int, std::size_t> order_counts;
    std::size_t ok = 0;
    for (const auto& it : items) {
        if (!it.estimate) continue;
        ++ok;
        ++order_counts[it.estimate->order];
        for (const auto& r : it.estimate->per_lag) {
            auto& [rej, n] = per_k[r.k];
            rej += r.reject ? 1 : 0;
            ++n;
        }
    }
    if (ok == 0) throw Error(Errc::InsufficientData, "every replication failed");

    Json j;
    j["spec"] = opt.spec.generic_string();
    j["replications"] = opt.replications;
    j["length"] = length;
    j["seed"] = ctx.seed;
    j["config"] = to_json(cfg);
    j["true_order"] = true_order ? Json(*true_order) : Json(nullptr);
    j["rejection_rates"] = Json::array();
    for (const auto& [k, c] : per_k) {
        const auto [lo, hi] = wilson_interval(c.first, c.second);
        j["rejection_rates"].push_back({{"k", k},
                                        {"rejections", c.first},
                                        {"tests", c.second},
                                        {"rate", static_cast<double>(c.first) / static_cast<double>(c.second)},
                                        {"ci95", {lo, hi}}});
        ctx.out_s() << fmt::format("k={:<3d} rejection rate {:.3f}  95% CI [{:.3f}, {:.3f}]  ({}/{})\n",
                                   k, static_cast<double>(c.first) / static_cast<double>(c.second),
                                   lo, hi, c.first, c.second);
    }
    j["order_distribution"] = Json::object();
    for (const auto& [k, n] : order_counts) j["order_distribution"][std::to_string(k)] = n;

    bool pass = true;
    if (true_order) {
        const auto it = per_k.find(*true_order);
        if (it != per_k.end()) {
            const double rate = static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
            const bool size_ok = rate >= opt.size_band[0] && rate <= opt.size_band[1];
            pass = pass && size_ok;
            j["size"] = {{"k", *true_order}, {"rate", rate}, {"band", opt.size_band}, {"pass", size_ok}};
            ctx.out_s() << fmt::format("size at k={}: {:.3f} in [{:.2f}, {:.2f}]: {}\n", *true_order,
                                       rate, opt.size_band[0], opt.size_band[1],
                                       size_ok ? "PASS" : "FAIL");
        }
        const double recovery = static_cast<double>(order_counts[*true_order]) / static_cast<double>(ok);
        const bool rec_ok = recovery >= opt.min_recovery;
        pass = pass && rec_ok;
        j["recovery"] = {{"order", *true_order}, {"rate", recovery}, {"min", opt.min_recovery}, {"pass", rec_ok}};
        ctx.out_s() << fmt::format("order recovery: {:.3f} >= {:.2f}: {}\n", recovery,
                                   opt.min_recovery, rec_ok ? "PASS" : "FAIL");
    }
    j["pass"] = pass;
    write_text(ctx.out / "calibration.json", j.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const ReportOptions& opt, const Context& ctx) {
    const auto cohorts = load_cohorts(opt.inputs, opt.group_by, opt.labels, opt.alpha);
    std::vector<std::pair<std::string, CohortSummary>> rows;
    for (const auto& c : cohorts) rows.emplace_back(c.label, summarize_orders(c.orders));
    std::vector<CohortComparison> comparisons;
    for (std::size_t i = 0; i < cohorts.size(); ++i) {
        for (std::size_t k = i + 1; k < cohorts.size(); ++k) {
            CohortComparison cmp;
            cmp.label = cohorts[i].label + " vs " + cohorts[k].label;
            try {
                cmp.t = pooled_t_test(cohorts[i].orders, cohorts[k].orders);
                cmp.f = f_test(cohorts[i].orders, cohorts[k].orders);
            } catch (const Error& e) {
                ctx.log() << "warning: " << cmp.label << ": " << e.what() << "\n";
                continue;
            }
            comparisons.push_back(cmp);
        }
    }
    write_text(ctx.out / "summary.md", render_summary(rows, comparisons, TableFormat::Markdown));
    write_text(ctx.out / "summary.csv", render_summary(rows, comparisons, TableFormat::Csv));
    write_text(ctx.out / "summary.json", render_summary(rows, comparisons, TableFormat::Json));
    for (const auto& c : cohorts) {
        int k_max = opt.kmax > 0 ? opt.kmax : std::max(c.k_max, 1);
        k_max = opt.kmax > 0 ? k_max : std::max(k_max, *std::max_element(c.orders.begin(), c.orders.end()));
        const std::string name = safe_name(c.label);
        write_text(ctx.out / fmt::format("histogram_{}.csv", name), histogram_csv(order_histogram(c.orders, k_max)));
        write_text(ctx.out / fmt::format("box_{}.json", name), boxstats_json(boxplot_stats(c.orders)));
        write_text(ctx.out / fmt::format("density_{}.csv", name),
                   density_csv(order_density(c.orders, 0.0, static_cast<double>(k_max) + 1.0)));
    }
    ctx.out_s() << render_summary(rows, comparisons, TableFormat::Markdown);
    return 0;
}

}  // namespace markov::cli
