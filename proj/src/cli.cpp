// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "diel/lexer.hpp"
#include "diel/parser.hpp"

namespace fs = std::filesystem;

namespace diel {

namespace {

std::string read_text(const std::string& path, ErrorCode missing) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(missing, "cannot read '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string resolve(const std::string& base, const std::string& path) {
    if (base.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base) / path).lexically_normal().string();
}

bool looks_like_latency(std::string_view s) {
    if (s.empty()) return false;
    if (s.rfind("fixed=", 0) == 0 || s.rfind("uniform=", 0) == 0 || s.rfind("script=", 0) == 0) return true;
    return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

bool parses_int(const std::string& s) {
    std::int64_t v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

bool parses_real(const std::string& s) {
    double v;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && p == s.data() + s.size();
}

/// Copies every table of a database file into `db`.
void merge_db_file(Database& db, const std::string& path) {
    if (db.relation_names().empty()) {
        db.load_file(path);
        return;
    }
    db.query("ATTACH DATABASE ? AS src", {Value{path}});
    auto tables = db.query("SELECT name, sql FROM src.sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%'");
    for (const auto& row : tables.rows) {
        const auto& name = std::get<std::string>(row[0]);
        db.exec(std::get<std::string>(row[1]), "copy of " + name + " from " + path);
        db.exec("INSERT INTO " + quote_ident(name) + " SELECT * FROM src." + quote_ident(name));
    }
    db.exec("DETACH DATABASE src");
}

}  // namespace

// ── configuration ──────────────────────────────────────────────

DbSpec parse_db_spec(std::string_view text) {
    auto fail = [&](const std::string& why) {
        return Error(ErrorCode::ConfigError,
                     "bad --db '" + std::string(text) + "': " + why + " (expected name=kind:path[:latency])");
    };
    auto eq = text.find('=');
    if (eq == std::string_view::npos || eq == 0) throw fail("missing name");
    DbSpec spec;
    spec.name = std::string(text.substr(0, eq));
    std::string_view rest = text.substr(eq + 1);
    auto colon = rest.find(':');
    std::string_view kind = rest.substr(0, colon);
    if (kind == "quick") {
        spec.kind = DbKind::InProcess;
    } else if (kind == "background") {
        spec.kind = DbKind::Worker;
        spec.latency = LatencySpec::fixed(1);
    } else if (kind == "remote") {
        spec.kind = DbKind::Remote;
    } else {
        throw fail("unknown kind '" + std::string(kind) + "'");
    }
    std::string_view paths = colon == std::string_view::npos ? std::string_view{} : rest.substr(colon + 1);
    if (auto last = paths.rfind(':'); last != std::string_view::npos && looks_like_latency(paths.substr(last + 1))) {
        if (spec.kind == DbKind::InProcess) throw fail("a quick database has no latency");
        spec.latency = parse_latency(paths.substr(last + 1));
        paths = paths.substr(0, last);
    }
    while (!paths.empty()) {
        auto comma = paths.find(',');
        std::string p(paths.substr(0, comma));
        if (p.empty()) throw fail("empty path");
        spec.paths.push_back(std::move(p));
        paths = comma == std::string_view::npos ? std::string_view{} : paths.substr(comma + 1);
    }
    return spec;
}

std::string db_spec_to_string(const DbSpec& spec) {
    std::string kind = spec.kind == DbKind::InProcess ? "quick" : spec.kind == DbKind::Worker ? "background" : "remote";
    std::string out = spec.name + "=" + kind + ":";
    for (std::size_t i = 0; i < spec.paths.size(); ++i) out += (i ? "," : "") + spec.paths[i];
    if (spec.kind != DbKind::InProcess) out += ":" + latency_to_string(spec.latency);
    return out;
}

void validate_config(RunConfig& config) {
    if (config.dbs.empty()) config.dbs.push_back(DbSpec{"main", DbKind::InProcess, {}, {}});
    std::set<std::string> names;
    int quick = 0;
    for (const auto& d : config.dbs) {
        if (!names.insert(d.name).second) throw Error(ErrorCode::ConfigError, "database '" + d.name + "' given twice");
        if (d.kind == DbKind::InProcess) ++quick;
    }
    if (quick != 1)
        throw Error(ErrorCode::ConfigError,
                    "exactly one quick database is required, got " + std::to_string(quick));
}

std::vector<Connection> open_connections(const std::vector<DbSpec>& dbs, const std::string& base_dir) {
    std::vector<Connection> out;
    for (const auto& spec : dbs) {
        Connection c{spec.name, spec.kind, Database{}, spec.latency};
        for (const auto& rel : spec.paths) {
            std::string path = resolve(base_dir, rel);
            if (!fs::exists(path))
                throw Error(ErrorCode::MissingExample, "data file '" + path + "' for database '" + spec.name + "' not found");
            std::string ext = to_lower(fs::path(path).extension().string());
            if (ext == ".csv") import_csv_file(c.db, fs::path(path).stem().string(), path);
            else merge_db_file(c.db, path);
        }
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<Statement> load_program(const std::vector<std::string>& files, const std::string& base_dir) {
    std::vector<Statement> out;
    for (const auto& f : files) {
        std::string path = resolve(base_dir, f);
        std::string text = read_text(path, ErrorCode::ConfigError);
        std::vector<Statement> stmts;
        try {
            stmts = parse_diel(text);
        } catch (const Error& e) {
            throw Error(e.code(), path + ": " + e.what());
        }
        for (auto& s : stmts) out.push_back(std::move(s));
    }
    return out;
}

// ── CSV ────────────────────────────────────────────────────────

CsvTable parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool quoted = false, field_started = false;
    std::size_t line = 1;
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
        record.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            quoted = field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_record();
            ++line;
        } else if (c != '\r') {
            field += c;
            field_started = true;
        }
    }
    if (quoted) throw Error(ErrorCode::ConfigError, "CSV: unterminated quote near line " + std::to_string(line));
    if (!field.empty() || !record.empty()) end_record();
    if (records.empty()) throw Error(ErrorCode::ConfigError, "CSV: missing header line");
    CsvTable out;
    out.header = std::move(records[0]);
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != out.header.size())
            throw Error(ErrorCode::ConfigError, "CSV: record " + std::to_string(r + 1) + " has " +
                                                    std::to_string(records[r].size()) + " fields, header has " +
                                                    std::to_string(out.header.size()));
        out.rows.push_back(std::move(records[r]));
    }
    return out;
}

void import_csv(Database& db, const std::string& table, const CsvTable& csv) {
    std::vector<std::string> types;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        bool all_int = true, all_real = true;
        for (const auto& r : csv.rows) {
            if (r[c].empty()) continue;
            all_int = all_int && parses_int(r[c]);
            all_real = all_real && parses_real(r[c]);
        }
        types.push_back(all_int ? "INTEGER" : all_real ? "REAL" : "TEXT");
    }
    std::string ddl = "CREATE TABLE " + quote_ident(table) + " (";
    for (std::size_t c = 0; c < csv.header.size(); ++c)
        ddl += (c ? ", " : "") + quote_ident(csv.header[c]) + " " + types[c];
    db.exec(ddl + ")", "import of " + table);
    std::vector<Row> rows;
    for (const auto& r : csv.rows) {
        Row row;
        for (std::size_t c = 0; c < r.size(); ++c) {
            if (r[c].empty()) row.emplace_back(std::monostate{});
            else if (types[c] == "INTEGER") row.emplace_back(std::stoll(r[c]));
            else if (types[c] == "REAL") row.emplace_back(std::stod(r[c]));
            else row.emplace_back(r[c]);
        }
        rows.push_back(std::move(row));
    }
    db.insert_rows(table, csv.header, rows);
}

void import_csv_file(Database& db, const std::string& table, const std::string& path) {
    std::string text = read_text(path, ErrorCode::MissingExample);
    try {
        import_csv(db, table, parse_csv(text));
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

// ── traces and replay ──────────────────────────────────────────

std::vector<TraceEntry> parse_trace(std::string_view text) {
    std::vector<TraceEntry> out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fail = [&](const std::string& why) {
            return Error(ErrorCode::TraceParseError, "trace line " + std::to_string(line_no) + ": " + why);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw fail(e.what());
        }
        if (!j.is_object()) throw fail("expected an object");
        for (const auto& [k, _] : j.items())
            if (k != "at_ms" && k != "event" && k != "payload") throw fail("unexpected field '" + k + "'");
        if (!j.contains("at_ms") || !j["at_ms"].is_number_integer()) throw fail("at_ms must be an integer");
        if (!j.contains("event") || !j["event"].is_string()) throw fail("event must be a string");
        TraceEntry e{j["at_ms"].get<std::int64_t>(), j["event"].get<std::string>(),
                     j.value("payload", nlohmann::json::object())};
        if (e.at_ms < 0) throw fail("at_ms is negative");
        if (!out.empty() && e.at_ms < out.back().at_ms)
            throw fail("at_ms " + std::to_string(e.at_ms) + " precedes " + std::to_string(out.back().at_ms));
        out.push_back(std::move(e));
    }
    return out;
}

std::string trace_to_text(const std::vector<TraceEntry>& trace) {
    std::string out;
    for (const auto& e : trace) {
        nlohmann::ordered_json j;
        j["at_ms"] = e.at_ms;
        j["event"] = e.event;
        j["payload"] = e.payload;
        out += j.dump() + "\n";
    }
    return out;
}

std::string ReplayResult::frame_log() const {
    std::string out;
    for (const auto& f : frames) out += frame_to_json(f).dump() + "\n";
    return out;
}

std::string ReplayResult::message_log() const {
    std::string out;
    for (const auto& m : messages) out += message_to_json(m).dump() + "\n";
    return out;
}

nlohmann::ordered_json summary_json(const Session& session, std::int64_t final_ms) {
    RunStats s = session.stats();
    nlohmann::ordered_json j;
    j["events"] = s.events;
    j["async_results"] = s.async_results;
    j["frames"] = s.frames;
    j["remote_messages"] = s.remote_messages;
    j["eval_requests"] = s.eval_requests;
    j["cache_hits"] = s.cache_hits;
    j["cache_misses"] = s.cache_misses;
    j["diagnostics"] = s.diagnostics;
    j["materialized_views"] = s.materialized_views;
    j["clock"] = session.clock();
    j["final_ms"] = final_ms;
    return j;
}

ReplayResult run_replay(const std::vector<Statement>& program, std::vector<Connection> connections,
                        const std::vector<TraceEntry>& trace, const RuntimeOptions& options, bool strict) {
    auto session = Session::open(program, std::move(connections), options);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const auto& e = trace[i];
        try {
            session->new_event(e.event, e.payload, e.at_ms);
        } catch (const Error& err) {
            throw Error(err.code(), "trace entry " + std::to_string(i + 1) + " (" + e.event + "): " + err.what());
        }
    }
    ReplayResult r;
    r.final_ms = session->run_until_quiescent();
    r.frames = session->frames();
    r.diagnostics = session->diagnostics();
    r.messages = session->federation().messages();
    r.summary = summary_json(*session, r.final_ms);
    if (strict && !r.diagnostics.empty()) r.exit_code = 1;
    return r;
}

// ── rendering ──────────────────────────────────────────────────

std::string render_frame(const OutputFrame& frame, std::size_t bar_width) {
    std::ostringstream os;
    os << frame.output << " @ timestep " << frame.timestep << " (" << frame.rows.size() << " rows)\n";
    if (frame.rows.empty()) return os.str();

    bool bars = frame.columns.size() == 2 && std::all_of(frame.rows.begin(), frame.rows.end(), [](const Row& r) {
                    return std::holds_alternative<std::int64_t>(r[1]) || std::holds_alternative<double>(r[1]);
                });
    if (bars) {
        auto num = [](const Value& v) {
            return std::holds_alternative<std::int64_t>(v) ? static_cast<double>(std::get<std::int64_t>(v))
                                                           : std::get<double>(v);
        };
        double max = 0;
        std::size_t label_w = frame.columns[0].size();
        for (const auto& r : frame.rows) {
            max = std::max(max, num(r[1]));
            label_w = std::max(label_w, value_to_display(r[0]).size());
        }
        for (const auto& r : frame.rows) {
            std::string label = value_to_display(r[0]);
            double v = num(r[1]);
            auto len = max > 0 && v > 0 ? static_cast<std::size_t>(v / max * static_cast<double>(bar_width) + 0.5) : 0;
            os << label << std::string(label_w - label.size(), ' ') << " | " << std::string(len, '#') << " "
               << value_to_display(r[1]) << "\n";
        }
        return os.str();
    }

    std::vector<std::size_t> width;
    for (const auto& c : frame.columns) width.push_back(c.size());
    for (const auto& r : frame.rows)
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
            width[i] = std::max(width[i], value_to_display(r[i]).size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << (i ? " | " : "") << cells[i];
            if (i + 1 < cells.size()) os << std::string(width[i] - cells[i].size(), ' ');
        }
        os << "\n";
    };
    line(frame.columns);
    for (std::size_t i = 0; i < width.size(); ++i) os << (i ? "-+-" : "") << std::string(width[i], '-');
    os << "\n";
    for (const auto& r : frame.rows) {
        std::vector<std::string> cells;
        for (const auto& v : r) cells.push_back(value_to_display(v));
        line(cells);
    }
    return os.str();
}

// ── REPL ───────────────────────────────────────────────────────

Repl::Repl(Session& session, std::ostream& out, Clock clock)
    : session_(session), out_(out), clock_(std::move(clock)) {}

bool Repl::execute(const std::string& raw) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') return true;
    auto sp = line.find(' ');
    std::string cmd = line.substr(0, sp);
    std::string rest = sp == std::string::npos ? "" : trim(line.substr(sp + 1));
    std::size_t seen = session_.frames().size();
    auto flush_frames = [&] {
        const auto& frames = session_.frames();
        for (std::size_t i = seen; i < frames.size(); ++i) out_ << render_frame(frames[i]);
        seen = frames.size();
    };

    try {
        std::int64_t now = clock_();
        session_.advance_to(now);
        flush_frames();
        if (cmd == "quit" || cmd == "exit") {
            return false;
        } else if (cmd == "help") {
            out_ << "commands: event <name> <json> | show <output> | log | save <file> | quit\n";
        } else if (cmd == "event") {
            auto sp2 = rest.find(' ');
            std::string name = rest.substr(0, sp2);
            std::string body = sp2 == std::string::npos ? "{}" : trim(rest.substr(sp2 + 1));
            if (name.empty()) throw Error(ErrorCode::ConfigError, "usage: event <name> <json>");
            nlohmann::json payload;
            try {
                payload = nlohmann::json::parse(body);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::TypeMismatch, std::string("payload is not JSON: ") + e.what());
            }
            auto diags = session_.diagnostics().size();
            auto t = session_.new_event(name, payload, now);
            if (t) {
                transcript_.push_back(TraceEntry{now, name, payload});
                out_ << "timestep " << *t << "\n";
            }
            for (std::size_t i = diags; i < session_.diagnostics().size(); ++i)
                out_ << "warning: " << session_.diagnostics()[i].message << "\n";
            flush_frames();
        } else if (cmd == "show") {
            const auto& outs = session_.outputs();
            if (std::find(outs.begin(), outs.end(), rest) == outs.end()) {
                std::string known;
                for (std::size_t i = 0; i < outs.size(); ++i) known += (i ? ", " : "") + outs[i];
                out_ << "error: unknown output '" << rest << "'; known outputs: " << known << "\n";
            } else {
                out_ << render_frame(session_.evaluate_output(rest));
            }
        } else if (cmd == "log") {
            for (const auto& r : session_.event_log()) {
                out_ << "t=" << r.timestep << " @" << r.timestamp << "ms " << r.relation;
                if (r.request_timestep) {
                    out_ << " " << r.rows.size() << " rows for request " << *r.request_timestep << "\n";
                } else {
                    nlohmann::ordered_json p = nlohmann::ordered_json::object();
                    for (std::size_t i = 0; i < r.columns.size(); ++i) p[r.columns[i]] = value_to_json(r.rows[0][i]);
                    out_ << " " << p.dump() << "\n";
                }
            }
        } else if (cmd == "save") {
            if (rest.empty()) throw Error(ErrorCode::ConfigError, "usage: save <file>");
            std::ofstream f(rest, std::ios::binary);
            if (!f) throw Error(ErrorCode::ConfigError, "cannot write '" + rest + "'");
            f << trace_to_text(transcript_);
            out_ << "saved " << transcript_.size() << " events to " << rest << "\n";
        } else {
            out_ << "error: unknown command '" << cmd << "' (try help)\n";
        }
    } catch (const Error& e) {
        out_ << "error: " << error_code_name(e.code()) << ": " << e.what() << "\n";
    } catch (const std::exception& e) {
        out_ << "error: " << e.what() << "\n";
    }
    return true;
}

void Repl::run(std::istream& in, bool prompt) {
    std::string line;
    while (true) {
        if (prompt) out_ << "diel> " << std::flush;
        if (!std::getline(in, line)) break;
        if (!execute(line)) break;
    }
}

// ── example corpus ─────────────────────────────────────────────

std::vector<Example> load_examples(const std::string& root) {
    if (!fs::is_directory(root)) throw Error(ErrorCode::MissingExample, "corpus directory '" + root + "' not found");
    std::vector<Example> out;
    for (const auto& entry : fs::directory_iterator(root)) {
        fs::path manifest = entry.path() / "example.json";
        if (!entry.is_directory() || !fs::exists(manifest)) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(manifest.string(), ErrorCode::MissingExample));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ConfigError, manifest.string() + ": " + e.what());
        }
        Example ex;
        ex.dir = entry.path().string();
        try {
            ex.name = j.at("name").get<std::string>();
            ex.description = j.value("description", "");
            ex.diel = j.at("diel").get<std::vector<std::string>>();
            std::vector<DbSpec> dbs;
            for (const auto& d : j.value("dbs", std::vector<std::string>{})) dbs.push_back(parse_db_spec(d));
            for (const auto& r : j.at("runs")) {
                ExampleRun run;
                run.name = r.at("name").get<std::string>();
                run.trace = r.at("trace").get<std::string>();
                run.golden = r.at("golden").get<std::string>();
                run.seed = r.value("seed", std::uint64_t{0});
                if (r.contains("dbs"))
                    for (const auto& d : r["dbs"]) run.dbs.push_back(parse_db_spec(d.get<std::string>()));
                else
                    run.dbs = dbs;
                ex.runs.push_back(std::move(run));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ConfigError, manifest.string() + ": " + e.what());
        }
        auto need = [&](const std::string& rel) {
            std::string p = resolve(ex.dir, rel);
            if (!fs::exists(p))
                throw Error(ErrorCode::MissingExample, "example '" + ex.name + "' is missing '" + p + "'");
        };
        for (const auto& d : ex.diel) need(d);
        for (const auto& run : ex.runs) {
            need(run.trace);
            for (const auto& d : run.dbs)
                for (const auto& p : d.paths) need(p);
        }
        out.push_back(std::move(ex));
    }
    std::sort(out.begin(), out.end(), [](const Example& a, const Example& b) { return a.name < b.name; });
    return out;
}

ReplayResult run_example(const Example& example, const ExampleRun& run, const RuntimeOptions& options) {
    RuntimeOptions o = options;
    o.seed = run.seed;
    auto program = load_program(example.diel, example.dir);
    auto trace = parse_trace(read_text(resolve(example.dir, run.trace), ErrorCode::MissingExample));
    return run_replay(program, open_connections(run.dbs, example.dir), trace, o);
}

}  // namespace diel
