// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diel/runtime.hpp"

namespace diel {

// ── configuration ──────────────────────────────────────────────

/// One `--db name=kind:path[,path...][:latency]` argument.
struct DbSpec {
    std::string name;
    DbKind kind = DbKind::InProcess;
    /// `.db` files are copied in; `.csv` files become a table named after
    /// the file stem.
    std::vector<std::string> paths;
    LatencySpec latency;

    bool operator==(const DbSpec&) const = default;
};

/// Kinds are `quick`, `background` and `remote`. Background instances
/// default to 1 ms, remote ones to 0 ms. Throws ConfigError.
DbSpec parse_db_spec(std::string_view text);
std::string db_spec_to_string(const DbSpec& spec);

struct RunConfig {
    std::vector<std::string> diel_files;
    std::vector<DbSpec> dbs;
    std::optional<std::uint64_t> seed;
    RuntimeOptions options;
    /// Any diagnostic makes the run fail.
    bool strict = false;
};

/// Exactly one quick database; names unique. Adds an empty quick `main`
/// when no database is given. Throws ConfigError.
void validate_config(RunConfig& config);

/// Opens the databases a config names, resolving relative paths against
/// `base_dir`. Throws ConfigError, MissingExample when a file is absent.
std::vector<Connection> open_connections(const std::vector<DbSpec>& dbs, const std::string& base_dir = "");

/// Concatenated statements of the given files. Throws ConfigError when a
/// file cannot be read.
std::vector<Statement> load_program(const std::vector<std::string>& files, const std::string& base_dir = "");

// ── CSV ────────────────────────────────────────────────────────

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// RFC 4180 style: comma separated, double-quoted fields with `""`
/// escapes, first line is the header. Throws ConfigError.
CsvTable parse_csv(std::string_view text);

/// Creates `table` with INTEGER, REAL or TEXT columns inferred from the
/// data (empty cells become NULL) and inserts the rows.
void import_csv(Database& db, const std::string& table, const CsvTable& csv);
void import_csv_file(Database& db, const std::string& table, const std::string& path);

// ── traces and replay ──────────────────────────────────────────

struct TraceEntry {
    std::int64_t at_ms = 0;
    std::string event;
    nlohmann::json payload;
};

/// JSON Lines with fields `at_ms`, `event`, `payload`; blank lines are
/// skipped. Throws TraceParseError with the line number.
std::vector<TraceEntry> parse_trace(std::string_view text);
std::string trace_to_text(const std::vector<TraceEntry>& trace);

struct ReplayResult {
    std::vector<OutputFrame> frames;
    nlohmann::ordered_json summary;
    std::vector<Diagnostic> diagnostics;
    std::vector<Message> messages;
    std::int64_t final_ms = 0;
    int exit_code = 0;

    /// One JSON line per frame.
    std::string frame_log() const;
    std::string message_log() const;
};

/// Drives a session on the virtual clock: each entry is admitted at its
/// time, then the federation runs until quiescent.
ReplayResult run_replay(const std::vector<Statement>& program, std::vector<Connection> connections,
                        const std::vector<TraceEntry>& trace, const RuntimeOptions& options, bool strict = false);

nlohmann::ordered_json summary_json(const Session& session, std::int64_t final_ms);

// ── rendering ──────────────────────────────────────────────────

/// Aligned text table; two-column frames whose second column is numeric
/// are drawn as horizontal ASCII bars instead.
std::string render_frame(const OutputFrame& frame, std::size_t bar_width = 40);

// ── REPL ───────────────────────────────────────────────────────

/// Line-oriented interactive front end. Commands:
///   event <name> <json>   admit an event at the current clock
///   show <output>         evaluate and print an output
///   log                   list accepted events
///   save <file>           write the accepted events as a trace
///   help, quit
class Repl {
public:
    using Clock = std::function<std::int64_t()>;

    Repl(Session& session, std::ostream& out, Clock clock);

    /// Runs one command; false after `quit`. Never throws for bad input.
    bool execute(const std::string& line);
    /// Reads commands until end of input or `quit`.
    void run(std::istream& in, bool prompt = true);

    /// Interaction events accepted so far, as a replayable trace.
    const std::vector<TraceEntry>& transcript() const { return transcript_; }

private:
    Session& session_;
    std::ostream& out_;
    Clock clock_;
    std::vector<TraceEntry> transcript_;
};

// ── example corpus ─────────────────────────────────────────────

struct ExampleRun {
    std::string name;
    std::string trace;   // path relative to the example directory
    std::string golden;  // frame log the trace must reproduce
    std::uint64_t seed = 0;
    std::vector<DbSpec> dbs;
};

struct Example {
    std::string name;
    std::string dir;
    std::string description;
    std::vector<std::string> diel;  // relative to dir
    std::vector<ExampleRun> runs;
};

/// Reads `<root>/*/example.json`, sorted by name. Throws MissingExample
/// naming any referenced file that does not exist.
std::vector<Example> load_examples(const std::string& root);

/// Replays one run of an example.
ReplayResult run_example(const Example& example, const ExampleRun& run, const RuntimeOptions& options);

}  // namespace diel
