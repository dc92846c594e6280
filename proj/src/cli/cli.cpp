#include "markov/cli.hpp"

#include "commands.hpp"
#include "markov/error.hpp"
#include "markov/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

namespace markov {

namespace {

void add_common(CLI::App& cmd, cli::Context& ctx) {
    cmd.add_option("--seed", ctx.seed, "Global random seed")->capture_default_str();
    cmd.add_option("--jobs", ctx.jobs, "Worker threads")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    cmd.add_option("--out", ctx.out, "Output directory")->capture_default_str();
    cmd.add_flag("-v,--verbose", ctx.verbosity, "Log progress to stderr (repeatable)");
}

void add_test_config(CLI::App& cmd, TestConfig& cfg, std::string& estimator) {
    cmd.add_option("--alpha", cfg.alpha, "Significance level")->capture_default_str();
    cmd.add_option("--kmax", cfg.k_max, "Largest Markov order to test")->capture_default_str();
    cmd.add_option("--freqs", cfg.n_freqs, "Frequency pairs per test")->capture_default_str();
    cmd.add_option("--bootstrap", cfg.n_bootstrap, "Bootstrap replicates")->capture_default_str();
    cmd.add_option("--min-eff", cfg.min_effective_length, "Minimum effective sample size")
        ->capture_default_str();
    cmd.add_option("--estimator", estimator, "CCF estimator")
        ->check(CLI::IsMember({"kernel", "mdn"}))
        ->capture_default_str();
    cmd.add_option("--mdn-components", cfg.mdn.components, "Mixture components (mdn)")
        ->capture_default_str();
    cmd.add_option("--mdn-epochs", cfg.mdn.epochs, "Training epochs (mdn)")->capture_default_str();
    cmd.add_flag("--full-trace", cfg.full_trace, "Test every feasible order");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Markov-order testing for multivariate trajectories", "markov-order"};
    app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
    app.require_subcommand(1);

    cli::Context ctx;
    ctx.out_stream = &out;
    ctx.err_stream = &err;

    cli::IngestOptions ingest;
    auto* c_ingest = app.add_subcommand("ingest", "Raw position CSVs to canonical trajectories");
    c_ingest->add_option("inputs", ingest.inputs, "Files or directories")->required();
    c_ingest->add_option("--resample-dt", ingest.cfg.resample_dt, "Resampling interval (s)")
        ->capture_default_str();
    c_ingest->add_option("--segment-len", ingest.cfg.segment_length, "Segment length (s)")
        ->capture_default_str();
    c_ingest->add_option("--min-len", ingest.cfg.min_length, "Minimum length (s)")
        ->capture_default_str();
    c_ingest->add_option("--mode", ingest.mode, "Segmentation mode")
        ->check(CLI::IsMember({"fixed", "min"}))
        ->capture_default_str();
    c_ingest->add_option("--trim-head", ingest.cfg.trim_head, "Seconds dropped at the start")
        ->capture_default_str();
    c_ingest->add_option("--trim-tail", ingest.cfg.trim_tail, "Seconds dropped at the end")
        ->capture_default_str();
    c_ingest->add_option("--earth-radius", ingest.cfg.earth_radius, "Sphere radius (m)")
        ->capture_default_str();
    c_ingest->add_option("--schema", ingest.schema, "Column layout")
        ->check(CLI::IsMember({"auto", "planar", "geodetic"}))
        ->capture_default_str();
    c_ingest->add_option("--cohort", ingest.cohort, "Cohort label for all inputs");
    c_ingest->add_option("--scenario", ingest.scenario, "Scenario label for all inputs");
    add_common(*c_ingest, ctx);

    cli::SynthOptions synth;
    auto* c_synth = app.add_subcommand("synth", "Seeded synthetic trajectories");
    c_synth->add_option("spec", synth.spec, "Process spec (JSON)")->required();
    c_synth->add_option("--count", synth.count, "Number of trajectories")->capture_default_str();
    c_synth->add_option("--length", synth.length, "Override the length from the process file");
    add_common(*c_synth, ctx);

    cli::TestOptions test;
    auto* c_test = app.add_subcommand("test", "Estimate the Markov order of every trajectory");
    c_test->add_option("input", test.input, "Directory of canonical trajectories")->required();
    add_test_config(*c_test, test.cfg, test.estimator);
    add_common(*c_test, ctx);

    cli::CompareOptions compare;
    auto* c_compare = app.add_subcommand("compare", "t- and F-test between two cohorts");
    c_compare->add_option("inputs", compare.inputs, "Results files (one per cohort, or one with --group-by)")
        ->required();
    c_compare->add_option("--group-by", compare.group_by, "Metadata key that splits cohorts");
    c_compare->add_option("--labels", compare.labels, "Cohort labels, first is the numerator")
        ->delimiter(',');
    c_compare->add_option("--threshold", compare.threshold, "Significance threshold")
        ->capture_default_str();
    add_common(*c_compare, ctx);

    cli::CalibrateOptions calib;
    auto* c_calib = app.add_subcommand("calibrate", "Monte Carlo size and power of the test");
    c_calib->add_option("spec", calib.spec, "Process spec (JSON)")->required();
    c_calib->add_option("--replications", calib.replications, "Monte Carlo replications")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c_calib->add_option("--length", calib.length, "Override the length from the process file");
    c_calib->add_option("--size-band", calib.size_band, "Accepted rejection-rate band lo,hi")
        ->delimiter(',')
        ->expected(2);
    c_calib->add_option("--min-recovery", calib.min_recovery, "Required order-recovery rate")
        ->capture_default_str();
    add_test_config(*c_calib, calib.cfg, calib.estimator);
    add_common(*c_calib, ctx);

    cli::ReportOptions report;
    auto* c_report = app.add_subcommand("report", "Summary tables, histograms and box plots");
    c_report->add_option("inputs", report.inputs, "Results files")->required();
    c_report->add_option("--group-by", report.group_by, "Metadata key that splits cohorts");
    c_report->add_option("--labels", report.labels, "Cohort labels in display order")
        ->delimiter(',');
    c_report->add_option("--alpha", report.alpha, "Re-decide orders at this level");
    c_report->add_option("--kmax", report.kmax, "Histogram range (default: from results)");
    add_common(*c_report, ctx);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << "markov-order\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n";
        err << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (c_ingest->parsed()) {
            ingest.cfg.mode = ingest.mode == "min" ? SegmentMode::MinLength : SegmentMode::FixedLength;
            return cli::cmd_ingest(ingest, ctx);
        }
        if (c_synth->parsed()) return cli::cmd_synth(synth, ctx);
        if (c_test->parsed()) {
            test.cfg.estimator = parse_estimator(test.estimator);
            test.cfg.rng_seed = ctx.seed;
            return cli::cmd_test(test, ctx);
        }
        if (c_compare->parsed()) return cli::cmd_compare(compare, ctx);
        if (c_calib->parsed()) {
            calib.cfg.estimator = parse_estimator(calib.estimator);
            calib.cfg.rng_seed = ctx.seed;
            return cli::cmd_calibrate(calib, ctx);
        }
        if (c_report->parsed()) return cli::cmd_report(report, ctx);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == Errc::InvalidConfig ? kExitUsage : kExitData;
    } catch (const nlohmann::json::exception& e) {
        err << "error: malformed JSON: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    err << "internal error: no subcommand dispatched\n";
    return kExitInternal;
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace markov
