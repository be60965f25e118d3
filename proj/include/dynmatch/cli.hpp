#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynmatch/engine.hpp"
#include "dynmatch/metrics.hpp"
#include "dynmatch/verifier.hpp"
#include "dynmatch/workload.hpp"

namespace dynmatch {

inline constexpr std::size_t kMaxCallsPerUpdate = 30;

struct ReplayOptions {
    /// Check invariants every this many updates; 0 checks only the final state.
    std::uint64_t verify_every = 1;
    bool ratio_check = false;
    bool collect_metrics = false;
};

struct ReplayResult {
    bool clean = true;
    std::uint64_t updates = 0;
    /// Set when a check failed: the update after which the state was dirty.
    std::optional<std::uint64_t> failed_at;
    ViolationReport report;
    std::size_t max_calls = 0;
    std::uint64_t call_bound_failures = 0;
    std::uint64_t ratio_checked = 0;
    std::uint64_t ratio_skipped = 0;
    std::uint64_t ratio_failures = 0;
    std::uint64_t lower_bound_failures = 0;
    std::array<std::uint64_t, kProcedureCount> procedure_counts{};
    std::vector<std::size_t> matching_trajectory;
    std::size_t final_matching_size = 0;
    std::size_t final_edge_count = 0;
    std::optional<RunStats> stats;
};

/// Replays `seq` through a fresh engine and stops at the first failed check.
inline ReplayResult replay(const UpdateSequence& seq, const Config& config, const ReplayOptions& options) {
    ReplayResult result;
    Engine engine(config);
    std::optional<MetricsCollector> metrics;
    if (options.collect_metrics) {
        metrics.emplace(config);
        engine.set_observer(&*metrics);
    }
    result.matching_trajectory.reserve(seq.ops.size());

    auto fail = [&](std::uint64_t index) {
        result.clean = false;
        result.failed_at = index;
    };

    for (std::uint64_t i = 0; i < seq.ops.size(); ++i) {
        const ProcedureTrace trace = engine.apply(seq.ops[i]);
        ++result.updates;
        result.max_calls = std::max(result.max_calls, trace.size());
        for (const auto& call : trace.calls) ++result.procedure_counts[static_cast<std::size_t>(call.procedure)];
        result.matching_trajectory.push_back(engine.matching_size());
        if (trace.size() > kMaxCallsPerUpdate) {
            ++result.call_bound_failures;
            fail(i);
            break;
        }
        const bool last = i + 1 == seq.ops.size();
        if ((options.verify_every != 0 && (i + 1) % options.verify_every == 0) || last) {
            result.report = check_invariants(engine.state());
            if (!result.report.clean()) {
                fail(i);
                break;
            }
        }
        if (options.ratio_check) {
            const auto& state = engine.state();
            if (!oracle_fits(state.n(), state.edge_count())) {
                ++result.ratio_skipped;
                continue;
            }
            const std::size_t mcm = brute_force_mcm(state);
            ++result.ratio_checked;
            const std::size_t m = state.matching_size();
            if (!check_ratio(mcm, m)) ++result.ratio_failures;
            if (3 * m < 2 * mcm) ++result.lower_bound_failures;  // |M| >= ceil(2 MCM / 3)
            if (result.ratio_failures + result.lower_bound_failures != 0) {
                fail(i);
                break;
            }
        }
    }
    if (seq.ops.empty()) {
        result.report = check_invariants(engine.state());
        result.clean = result.report.clean();
    }
    result.final_matching_size = engine.matching_size();
    result.final_edge_count = engine.state().edge_count();
    if (metrics) result.stats = metrics->stats();
    return result;
}

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline void print_summary(std::ostream& out, const UpdateSequence& seq, const Config& config, const ReplayResult& r) {
    out << "n                    " << seq.n << '\n';
    out << "threshold            " << config.effective_threshold() << '\n';
    out << "seed                 " << config.seed << '\n';
    out << "updates              " << r.updates << '\n';
    out << "final matching size  " << r.final_matching_size << '\n';
    out << "final edge count     " << r.final_edge_count << '\n';
    out << "max calls per update " << r.max_calls << '\n';
    for (Procedure p : kAllProcedures)
        out << "  " << std::left << std::setw(32) << procedure_name(p) << r.procedure_counts[static_cast<std::size_t>(p)]
            << '\n';
    if (r.stats) {
        out << "epochs opened        " << r.stats->epochs_opened << '\n';
        out << "epoch-sets good/bad  " << r.stats->good_sets << '/' << r.stats->bad_sets << '\n';
    }
}

inline void report_failure(std::ostream& err, const ReplayResult& r) {
    err << "dirty state after update " << *r.failed_at << '\n';
    if (r.call_bound_failures) err << "procedure calls exceeded " << kMaxCallsPerUpdate << '\n';
    if (r.ratio_failures) err << "approximation ratio violated: 2*MCM > 3*|M|\n";
    if (r.lower_bound_failures) err << "matching below ceil(2/3 * MCM)\n";
    err << r.report.to_text();
}

inline std::vector<std::uint32_t> parse_n_list(const std::string& text) {
    std::vector<std::uint32_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::uint32_t n = 0;
        if (!parse_int(trim(item), n) || n < 2) throw CLI::ValidationError("--n-list", "bad entry '" + item + "'");
        out.push_back(n);
    }
    if (out.empty()) throw CLI::ValidationError("--n-list", "empty list");
    return out;
}

}  // namespace detail

/// Entry point behind the `dynmatch` executable. Exit codes: 0 clean,
/// 1 invariant or ratio violation, 2 usage or I/O error.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fully dynamic 3/2-approximate maximum matching", "dynmatch"};
    app.require_subcommand(1);

    // gen
    std::string pattern = "random";
    std::uint32_t gen_n = 0;
    std::int64_t gen_t = 0;
    double p_insert = 0.6;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "-";
    auto* gen = app.add_subcommand("gen", "Write an update sequence file");
    gen->add_option("--pattern", pattern, "random | star-churn | clique-build-teardown | path-zipper")
        ->check(CLI::IsMember({"random", "star-churn", "clique-build-teardown", "path-zipper"}));
    gen->add_option("--n", gen_n, "Vertex count")->required()->check(CLI::PositiveNumber);
    gen->add_option("--t", gen_t, "Updates (random) or churn rounds (named patterns)")->check(CLI::NonNegativeNumber);
    gen->add_option("--p-insert", p_insert, "Insert probability for random")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", gen_out, "Output file, - for stdout");

    // run / verify share their options
    std::string input;
    std::uint64_t seed = 1;
    std::uint32_t threshold = 0;
    std::uint64_t verify_every = 1;
    bool teardown = false;
    std::string metrics_out;
    std::string format = "json";
    auto* run = app.add_subcommand("run", "Replay a sequence file");
    auto* verify = app.add_subcommand("verify", "Replay with full checks and the oracle ratio test");
    for (auto* sub : {run, verify}) {
        sub->add_option("--input", input, "Sequence file")->required();
        sub->add_option("--seed", seed, "Engine seed");
        sub->add_option("--threshold", threshold, "Level threshold, 0 for ceil(sqrt n)");
        sub->add_flag("--teardown", teardown, "Append deletions of all remaining edges");
        sub->add_option("--metrics", metrics_out, "Write metrics to this file");
        sub->add_option("--format", format, "Metrics format")->check(CLI::IsMember({"json", "csv"}));
    }
    run->add_option("--verify-every", verify_every, "Check invariants every V updates, 0 for the end only");

    // bench
    std::string n_list = "4096,16384,65536";
    std::uint64_t per_n = 10;
    std::uint64_t bench_seed = 1;
    std::string bench_format = "table";
    auto* bench = app.add_subcommand("bench", "Amortized update time for several n");
    bench->add_option("--n-list", n_list, "Comma-separated vertex counts");
    bench->add_option("--updates-per-n", per_n, "Random updates per vertex, t = K * n")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "Seed for workload and engine");
    bench->add_option("--p-insert", p_insert, "Insert probability")->check(CLI::Range(0.0, 1.0));
    bench->add_option("--format", bench_format, "table | csv | json")->check(CLI::IsMember({"table", "csv", "json"}));

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (gen->parsed()) {
            UpdateSequence seq;
            if (pattern == "random") {
                if (gen_t > 0 && !(p_insert > 0.0 && p_insert < 1.0)) {
                    err << "error: --p-insert must lie strictly between 0 and 1\n";
                    return 2;
                }
                seq = gen_random(gen_n, gen_t, p_insert, gen_seed);
            } else {
                seq = gen_named(pattern, gen_n, gen_seed, gen_t);
            }
            const std::string text = serialize(seq);
            if (gen_out == "-")
                out << text;
            else
                detail::write_file(gen_out, text);
            return 0;
        }

        if (run->parsed() || verify->parsed()) {
            const bool full = verify->parsed();
            UpdateSequence seq;
            try {
                seq = parse(detail::read_file(input));
            } catch (const SequenceError& e) {
                err << "error: " << input << ": " << e.what() << '\n';
                return 2;
            }
            if (teardown) seq = extend_with_teardown(seq);
            const Config config(seq.n, threshold, seed);
            ReplayOptions options;
            options.verify_every = full ? 1 : verify_every;
            options.ratio_check = full;
            options.collect_metrics = true;
            const ReplayResult result = replay(seq, config, options);

            detail::print_summary(out, seq, config, result);
            if (full) {
                if (result.ratio_skipped == 0)
                    out << "ratio check          passed on " << result.ratio_checked << " states\n";
                else
                    out << "ratio check          checked " << result.ratio_checked << ", skipped " << result.ratio_skipped
                        << " (instance exceeds " << kOracleMaxVertices << " vertices and " << kOracleMaxEdges
                        << " edges)\n";
            }
            if (!metrics_out.empty() && result.stats) {
                const auto fmt = format == "csv" ? MetricsFormat::csv : MetricsFormat::json;
                detail::write_file(metrics_out, export_metrics(*result.stats, fmt));
            }
            if (!result.clean) {
                detail::report_failure(err, result);
                return 1;
            }
            out << "status               clean\n";
            return 0;
        }

        if (bench->parsed()) {
            const auto ns = detail::parse_n_list(n_list);
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            double previous = 0.0;
            if (bench_format == "table") out << "n        threshold  updates    total_ms    ns/update  growth\n";
            if (bench_format == "csv") out << "n,threshold,updates,total_ns,amortized_ns,growth\n";
            for (std::uint32_t n : ns) {
                const auto t = static_cast<std::int64_t>(per_n * n);
                const UpdateSequence seq = gen_random(n, t, p_insert, bench_seed);
                Engine engine(Config(n, 0, bench_seed));
                const auto start = std::chrono::steady_clock::now();
                for (const auto& op : seq.ops) engine.apply(op);
                const auto total = std::chrono::duration_cast<std::chrono::nanoseconds>(
                                       std::chrono::steady_clock::now() - start)
                                       .count();
                const double amortized = static_cast<double>(total) / static_cast<double>(t);
                const double growth = previous > 0.0 ? amortized / previous : 0.0;
                previous = amortized;
                if (bench_format == "table") {
                    out << std::left << std::setw(9) << n << std::setw(11) << engine.threshold() << std::setw(11) << t
                        << std::setw(12) << std::fixed << std::setprecision(1) << total / 1e6 << std::setw(11)
                        << amortized << std::setprecision(2) << growth << '\n';
                    out << std::defaultfloat;
                } else if (bench_format == "csv") {
                    out << n << ',' << engine.threshold() << ',' << t << ',' << total << ',' << amortized << ','
                        << growth << '\n';
                }
                rows.push_back({{"n", n},
                                {"threshold", engine.threshold()},
                                {"updates", t},
                                {"seed", bench_seed},
                                {"total_ns", total},
                                {"amortized_ns_per_update", amortized},
                                {"growth", growth}});
            }
            if (bench_format == "json") out << rows.dump(2) << '\n';
            return 0;
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const std::invalid_argument*>(&e) == nullptr &&
            dynamic_cast<const std::out_of_range*>(&e) == nullptr) {
            err << "internal error: " << e.what() << '\n';
            return 1;
        }
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(std::move(args), out, err);
}

}  // namespace dynmatch
