// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line driver: trace replay, interactive sessions, CSV import and
// the example corpus check.

#include <unistd.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "diel/cli.hpp"
#include "diel/compiler.hpp"
#include "diel/planner.hpp"

namespace fs = std::filesystem;
using namespace diel;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::MissingExample, "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::ConfigError, "cannot write '" + path.string() + "'");
    out << text;
}

bool is_usage_error(ErrorCode c) {
    return c == ErrorCode::ConfigError || c == ErrorCode::MissingExample || c == ErrorCode::TraceParseError;
}

std::size_t first_difference(const std::string& a, const std::string& b) {
    std::istringstream sa(a), sb(b);
    std::string la, lb;
    for (std::size_t line = 1;; ++line) {
        bool ea = !std::getline(sa, la), eb = !std::getline(sb, lb);
        if (ea || eb || la != lb) return line;
    }
}

int run_corpus(const std::string& root, bool regen, const RuntimeOptions& options) {
    int failures = 0;
    std::size_t runs = 0;
    for (const auto& ex : load_examples(root)) {
        for (const auto& run : ex.runs) {
            ++runs;
            auto result = run_example(ex, run, options);
            std::string log = result.frame_log();
            fs::path golden = fs::path(ex.dir) / run.golden;
            if (regen) {
                write_file(golden, log);
                std::cout << "wrote " << ex.name << "/" << run.name << " (" << result.frames.size() << " frames)\n";
                continue;
            }
            if (!fs::exists(golden))
                throw Error(ErrorCode::MissingExample, "example '" + ex.name + "' is missing '" + golden.string() + "'");
            std::string expected = slurp(golden.string());
            if (expected == log) {
                std::cout << "ok   " << ex.name << "/" << run.name << " (" << result.frames.size() << " frames)\n";
            } else {
                ++failures;
                std::cout << "FAIL " << ex.name << "/" << run.name << ": first difference at line "
                          << first_difference(expected, log) << "\n";
            }
        }
    }
    if (!regen) std::cout << runs - failures << "/" << runs << " runs match\n";
    return failures ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diel: reactive SQL over federated databases"};
    app.set_version_flag("--version", "diel 0.1.0");

    RunConfig config;
    std::vector<std::string> db_args;
    std::string trace_path, out_dir;
    std::uint64_t seed = 0;
    bool no_cache = false, no_materialize = false, dump_ir_flag = false, dump_plan_flag = false, interactive = false;

    app.add_option("--diel", config.diel_files, "DIEL program file (repeatable)");
    app.add_option("--db", db_args, "database: name=quick|background|remote:path[,path][:latency]");
    app.add_option("--trace", trace_path, "JSON Lines interaction trace to replay");
    auto* seed_opt = app.add_option("--seed", seed, "RNG seed (required with --trace)");
    app.add_option("--out", out_dir, "write frames.jsonl, summary.json and messages.jsonl here");
    app.add_flag("--no-cache", no_cache, "disable the async request cache");
    app.add_flag("--no-materialize", no_materialize, "disable shared view materialization");
    app.add_flag("--dedupe-frames", config.options.dedupe_frames, "skip frames identical to the previous one");
    app.add_flag("--dump-ir", dump_ir_flag, "print the compiled catalog and exit");
    app.add_flag("--dump-plan", dump_plan_flag, "print the federation plan and exit");
    app.add_flag("--interactive", interactive, "read commands from stdin");
    app.add_flag("--strict", config.strict, "exit 1 when any diagnostic is raised");

    auto* import_cmd = app.add_subcommand("import", "load a CSV file into a database file");
    std::string csv_path, into, table;
    import_cmd->add_option("csv", csv_path, "CSV file with a header line")->required();
    import_cmd->add_option("--into", into, "target database file")->required();
    import_cmd->add_option("--table", table, "table name (default: CSV file stem)");

    auto* corpus_cmd = app.add_subcommand("corpus", "replay every example and compare with its golden log");
    std::string corpus_root = "corpus";
    bool regen = false;
    corpus_cmd->add_option("--root", corpus_root, "corpus directory");
    corpus_cmd->add_flag("--regen", regen, "rewrite golden logs instead of comparing");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    config.options.cache = !no_cache;
    config.options.materialize = !no_materialize;

    try {
        if (*import_cmd) {
            Database db;
            if (fs::exists(into)) db.load_file(into);
            import_csv_file(db, table.empty() ? fs::path(csv_path).stem().string() : table, csv_path);
            db.save_file(into);
            return 0;
        }
        if (*corpus_cmd) return run_corpus(corpus_root, regen, config.options);

        if (config.diel_files.empty()) throw Error(ErrorCode::ConfigError, "--diel is required");
        for (const auto& d : db_args) config.dbs.push_back(parse_db_spec(d));
        validate_config(config);
        if (!trace_path.empty() && !*seed_opt) throw Error(ErrorCode::ConfigError, "--seed is required with --trace");
        if (!trace_path.empty() && interactive)
            throw Error(ErrorCode::ConfigError, "--trace and --interactive are exclusive");
        config.seed = seed;
        config.options.seed = seed;

        auto program = load_program(config.diel_files);
        auto connections = open_connections(config.dbs);

        if (dump_ir_flag || dump_plan_flag) {
            auto session = Session::open(program, std::move(connections), config.options);
            if (dump_ir_flag) std::cout << dump_ir(session->plan().program);
            if (dump_plan_flag) std::cout << dump_plan(session->plan());
            return 0;
        }

        if (interactive) {
            auto session = Session::open(program, std::move(connections), config.options);
            auto start = std::chrono::steady_clock::now();
            Repl repl(*session, std::cout, [start] {
                return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start)
                    .count();
            });
            for (const auto& f : session->frames()) std::cout << render_frame(f);
            repl.run(std::cin, isatty(STDIN_FILENO) != 0);
            return config.strict && !session->diagnostics().empty() ? 1 : 0;
        }

        std::vector<TraceEntry> trace;
        if (!trace_path.empty()) trace = parse_trace(slurp(trace_path));
        auto result = run_replay(program, std::move(connections), trace, config.options, config.strict);
        for (const auto& d : result.diagnostics)
            std::cerr << "warning: " << d.code << " at timestep " << d.timestep << ": " << d.message << "\n";
        if (out_dir.empty()) {
            std::cout << result.frame_log();
            std::cerr << result.summary.dump(2) << "\n";
        } else {
            fs::create_directories(out_dir);
            write_file(fs::path(out_dir) / "frames.jsonl", result.frame_log());
            write_file(fs::path(out_dir) / "summary.json", result.summary.dump(2) + "\n");
            write_file(fs::path(out_dir) / "messages.jsonl", result.message_log());
        }
        return result.exit_code;
    } catch (const Error& e) {
        std::cerr << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
        return is_usage_error(e.code()) ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
