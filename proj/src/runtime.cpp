// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/runtime.hpp"

#include <algorithm>

#include "diel/lexer.hpp"
#include "diel/parser.hpp"

namespace diel {

namespace {

const Query& source_of(const RelationDef& rel) { return rel.source_query ? *rel.source_query : *rel.query; }

std::string column_list(const std::vector<std::string>& cols) {
    std::string out;
    for (std::size_t i = 0; i < cols.size(); ++i) out += (i ? ", " : "") + quote_ident(cols[i]);
    return out;
}

}  // namespace

nlohmann::ordered_json frame_to_json(const OutputFrame& frame) {
    nlohmann::ordered_json j;
    j["output"] = frame.output;
    j["timestep"] = frame.timestep;
    j["rows"] = rows_to_json(frame.rows);
    return j;
}

std::unique_ptr<Session> Session::open(const std::vector<Statement>& statements,
                                       std::vector<Connection> connections, const RuntimeOptions& options,
                                       std::vector<OutputBinding> bindings) {
    std::vector<DbDescriptor> dbs;
    CompileOptions copts;
    for (auto& c : connections) {
        dbs.push_back(describe_database(c.id, c.kind, c.db, c.latency));
        for (const auto& r : dbs.back().relations) copts.externals.push_back(r);
    }
    CompiledProgram program = compile(statements, copts);
    FederationPlan plan = plan_federation(program, dbs);
    return std::make_unique<Session>(std::move(plan), std::move(connections), options, std::move(bindings));
}

Session::Session(FederationPlan plan, std::vector<Connection> connections, const RuntimeOptions& options,
                 std::vector<OutputBinding> bindings)
    : plan_(std::move(plan)), options_(options) {
    if (options_.materialize) materialization_ = apply_materialization(plan_);
    const Catalog& cat = plan_.program.catalog;
    diagnostics_ = plan_.program.diagnostics;

    for (const auto& b : bindings) bind_output(b.output, b.callback);

    federation_ = std::make_unique<Federation>(plan_.coordinator, options_.seed);
    for (auto& c : connections) {
        c.db.register_udfs(options_.seed, c.id);
        federation_->add_instance(c.id, c.kind, std::move(c.db), c.latency);
    }
    for (const auto& d : plan_.dbs)
        if (!federation_->has_instance(d.id))
            throw Error(ErrorCode::SetupFailure, "no connection for database '" + d.id + "'");
    federation_->install(plan_);
    federation_->on_coordinator_message([this](const Message& m) {
        on_async_result(m.view, m.rows, m.request_timestep, m.deliver_ms);
    });

    const auto& graph = plan_.program.graph;
    for (const auto& node : graph.topo_order) {
        const RelationDef* rel = cat.find(node);
        if (!rel || rel->kind != RelationKind::Output) continue;
        outputs_.push_back(rel->name);
        auto deps = graph.closure(rel->name);
        closure_[rel->name] = {deps.begin(), deps.end()};
    }
    for (const auto& [view, leader] : plan_.leaders) cacheable_[view] = is_cacheable(view, cat);

    for (const auto& v : materialization_.views) refresh(v);

    // Async views without event inputs are requested once.
    for (const auto& [view, deps] : plan_.event_deps)
        if (deps.empty()) request(view, 0);

    std::vector<OutputFrame> frames;
    for (const auto& out : outputs_) {
        bool dynamic = std::any_of(closure_[out].begin(), closure_[out].end(), [&](const std::string& d) {
            const RelationDef* r = cat.find(d);
            return r && (r->kind == RelationKind::EventTable || r->kind == RelationKind::AsyncView ||
                         r->kind == RelationKind::HistoryTable);
        });
        if (dynamic) continue;
        OutputFrame f = evaluate_output(out);
        f.timestep = 0;
        frames.push_back(std::move(f));
    }
    render(std::move(frames));
}

Database& Session::coordinator_db() { return federation_->instance(plan_.coordinator).db(); }

void Session::bind_output(const std::string& output, RenderCallback callback) {
    const RelationDef* rel = plan_.program.catalog.find(output);
    if (!rel || rel->kind != RelationKind::Output)
        throw Error(ErrorCode::UnknownOutput, "cannot bind unknown output '" + output + "'");
    callbacks_[rel->name].push_back(std::move(callback));
}

// ── events ─────────────────────────────────────────────────────

Row Session::coerce_payload(const RelationDef& rel, const nlohmann::json& payload) const {
    if (!payload.is_object() && !(payload.is_null() && rel.columns.empty()))
        throw Error(ErrorCode::TypeMismatch, "payload for '" + rel.name + "' must be a JSON object");
    Row row;
    std::size_t matched = 0;
    for (const auto& col : rel.columns) {
        auto it = payload.find(col.name);
        if (it == payload.end())
            throw Error(ErrorCode::TypeMismatch, "payload for '" + rel.name + "' lacks column '" + col.name + "'");
        ++matched;
        const auto& v = *it;
        auto bad = [&](const char* want) {
            return Error(ErrorCode::TypeMismatch, rel.name + "." + col.name + " expects " + want + ", got " + v.dump());
        };
        if (v.is_null()) {
            row.emplace_back(std::monostate{});
            continue;
        }
        switch (col.type) {
        case ColumnType::Int:
            if (!v.is_number_integer()) throw bad("INT");
            row.emplace_back(v.get<std::int64_t>());
            break;
        case ColumnType::Real:
            if (!v.is_number()) throw bad("REAL");
            row.emplace_back(v.get<double>());
            break;
        case ColumnType::Text:
            if (!v.is_string()) throw bad("TEXT");
            row.emplace_back(v.get<std::string>());
            break;
        case ColumnType::Any:
            if (v.is_structured() || v.is_boolean()) throw bad("a scalar");
            row.push_back(value_from_json(v));
            break;
        }
    }
    if (payload.is_object() && payload.size() != matched) {
        for (const auto& [k, _] : payload.items())
            if (!rel.has_column(k))
                throw Error(ErrorCode::TypeMismatch, "'" + rel.name + "' has no column '" + k + "'");
    }
    return row;
}

bool Session::check_passes(const RelationDef& rel, const Row& row) {
    std::vector<std::string> selects;
    for (const auto& col : rel.columns) selects.push_back("? AS " + quote_ident(col.name));
    std::string from = "(SELECT " + (selects.empty() ? std::string("1") : [&] {
        std::string s;
        for (std::size_t i = 0; i < selects.size(); ++i) s += (i ? ", " : "") + selects[i];
        return s;
    }()) + ") AS " + quote_ident(rel.name);
    for (const auto& col : rel.columns) {
        if (!col.check) continue;
        auto rs = coordinator_db().query("SELECT (" + print_expr(*col.check, PrintMode::Sql) + ") FROM " + from,
                                         row, "CHECK on " + rel.name + "." + col.name);
        const Value& v = rs.rows.at(0).at(0);
        if (is_null(v)) continue;
        bool truthy = std::holds_alternative<std::int64_t>(v)  ? std::get<std::int64_t>(v) != 0
                      : std::holds_alternative<double>(v)      ? std::get<double>(v) != 0.0
                                                               : true;
        if (!truthy) {
            diagnostics_.push_back(Diagnostic{Severity::Warning, "CheckViolation",
                                              "event on '" + rel.name + "' ignored: CHECK on " + col.name +
                                                  " failed for " + rows_to_json({row}).dump(),
                                              clock_});
            return false;
        }
    }
    return true;
}

std::optional<std::int64_t> Session::new_event(const std::string& name, const nlohmann::json& payload,
                                               std::int64_t at_ms) {
    if (processing_) {
        deferred_.push_back([this, name, payload, at_ms] { new_event(name, payload, at_ms); });
        return std::nullopt;
    }
    const RelationDef* rel = plan_.program.catalog.find(name);
    if (!rel || rel->kind != RelationKind::EventTable)
        throw Error(ErrorCode::UnknownEvent, "'" + name + "' is not an event table");
    Row row = coerce_payload(*rel, payload);
    federation_->advance_to(at_ms);
    auto t = admit_event(*rel, row, at_ms);
    federation_->run_due();
    return t;
}

void Session::schedule_event(std::string name, nlohmann::json payload, std::int64_t at_ms) {
    const RelationDef* rel = plan_.program.catalog.find(name);
    if (!rel || rel->kind != RelationKind::EventTable)
        throw Error(ErrorCode::UnknownEvent, "'" + name + "' is not an event table");
    Row row = coerce_payload(*rel, payload);
    std::string canonical = rel->name;
    federation_->schedule(at_ms, [this, canonical, row, at_ms] {
        admit_event(plan_.program.catalog.at(canonical), row, at_ms);
    });
}

std::optional<std::int64_t> Session::admit_event(const RelationDef& rel, const Row& row, std::int64_t at_ms) {
    if (!check_passes(rel, row)) return std::nullopt;
    std::int64_t t = ++clock_;
    Row full = row;
    full.emplace_back(t);
    full.emplace_back(at_ms);
    coordinator_db().insert_rows(rel.name, rel.all_column_names(), {full});
    log_.push_back(EventRecord{rel.name, rel.user_column_names(), {row}, t, at_ms, std::nullopt});
    ++events_;
    dispatch_async(rel.name, t);
    process_timestep(t, rel.name);
    drain_deferred();
    return t;
}

std::optional<std::int64_t> Session::on_async_result(const std::string& view, const std::vector<Row>& rows,
                                                     std::int64_t request_timestep, std::int64_t at_ms) {
    const RelationDef* rel = plan_.program.catalog.find(view);
    if (!rel || rel->kind != RelationKind::AsyncView)
        throw Error(ErrorCode::UnknownAsyncView, "'" + view + "' is not an async view");
    for (const auto& r : rows)
        if (r.size() != rel->columns.size())
            throw Error(ErrorCode::SchemaMismatch, "result for '" + view + "' has " + std::to_string(r.size()) +
                                                       " columns, expected " +
                                                       std::to_string(rel->columns.size()));
    if (processing_) {
        deferred_.push_back([this, view, rows, request_timestep, at_ms] {
            on_async_result(view, rows, request_timestep, at_ms);
        });
        return std::nullopt;
    }
    auto pending = pending_params_.find({rel->name, request_timestep});
    if (pending != pending_params_.end()) {
        cache_.store(rel->name, pending->second, rows);
        pending_params_.erase(pending);
    }

    std::int64_t t = ++clock_;
    std::vector<Row> full;
    for (const auto& r : rows) {
        Row f = r;
        f.emplace_back(t);
        f.emplace_back(at_ms);
        f.emplace_back(request_timestep);
        full.push_back(std::move(f));
    }
    coordinator_db().insert_rows(rel->name, rel->all_column_names(), full);
    log_.push_back(EventRecord{rel->name, rel->user_column_names(), rows, t, at_ms, request_timestep});
    ++async_results_;
    process_timestep(t, rel->name);
    drain_deferred();
    return t;
}

void Session::drain_deferred() {
    while (!deferred_.empty() && !processing_) {
        auto next = std::move(deferred_.front());
        deferred_.erase(deferred_.begin());
        next();
    }
}

// ── async dispatch ─────────────────────────────────────────────

nlohmann::json Session::cache_params(const std::string& view) {
    nlohmann::json params = nlohmann::json::object();
    for (const auto& dep : plan_.event_deps.at(view)) {
        const RelationDef& rel = plan_.program.catalog.at(dep);
        auto cols = rel.user_column_names();
        std::string sql = "SELECT " + (cols.empty() ? std::string("1") : column_list(cols)) + " FROM " +
                          quote_ident(dep) + " WHERE timestep = (SELECT MAX(timestep) FROM " + quote_ident(dep) +
                          ")";
        params[dep] = rows_to_json(coordinator_db().query(sql, {}, "cache parameters of " + view).rows);
    }
    return params;
}

void Session::dispatch_async(const std::string& trigger, std::int64_t t) {
    for (const auto& [view, deps] : plan_.event_deps)
        if (std::find(deps.begin(), deps.end(), trigger) != deps.end()) request(view, t);
}

void Session::request(const std::string& view, std::int64_t t) {
    const std::string& coord = plan_.coordinator;
    const std::string& leader = plan_.leaders.at(view);
    auto result_message = [&](std::vector<Row> rows) {
        Message m;
        m.kind = MessageKind::ResultRows;
        m.from = coord;
        m.to = coord;
        m.view = view;
        m.rows = std::move(rows);
        m.request_timestep = t;
        federation_->send(std::move(m));
    };

    if (options_.cache && cacheable_[view]) {
        nlohmann::json params = cache_params(view);
        if (auto id = cache_.lookup(view, params)) {
            result_message(cache_.rows(*id));
            return;
        }
        pending_params_[{view, t}] = std::move(params);
    }

    if (leader == coord) {
        result_message(federation_->instance(coord).evaluate(view));
        return;
    }
    for (const auto& dep : plan_.event_deps.at(view)) {
        std::int64_t& upto = shipped_upto_[leader][dep];
        auto rs = coordinator_db().query("SELECT * FROM " + quote_ident(dep) + " WHERE timestep > ? ORDER BY timestep",
                                         {Value{upto}}, "shipment of " + dep);
        Message m;
        m.kind = MessageKind::ShipData;
        m.from = coord;
        m.to = leader;
        m.relation = dep;
        m.rows = std::move(rs.rows);
        m.request_timestep = t;
        upto = t;
        federation_->send(std::move(m));
    }
    Message m;
    m.kind = MessageKind::EvalRequest;
    m.from = coord;
    m.to = leader;
    m.view = view;
    m.request_timestep = t;
    ++eval_requests_;
    federation_->send(std::move(m));
}

// ── one timestep ───────────────────────────────────────────────

void Session::refresh(const std::string& view) {
    const RelationDef& rel = plan_.program.catalog.at(view);
    Database& db = coordinator_db();
    db.exec("DELETE FROM " + quote_ident(rel.name), "refresh " + rel.name);
    db.exec("INSERT INTO " + quote_ident(rel.name) + " SELECT * FROM (" + relation_query_sql(rel) + ")",
            "refresh " + rel.name);
}

OutputFrame Session::evaluate_output(const std::string& output) {
    const RelationDef* rel = plan_.program.catalog.find(output);
    if (!rel || rel->kind != RelationKind::Output)
        throw Error(ErrorCode::UnknownOutput, "unknown output '" + output + "'");
    auto rs = coordinator_db().query("SELECT * FROM " + quote_ident(rel->name), {}, "output " + rel->name);
    OutputFrame f{rel->name, clock_, std::move(rs.columns), std::move(rs.rows)};
    if (source_of(*rel).order_by.empty()) std::sort(f.rows.begin(), f.rows.end(), row_less);
    return f;
}

void Session::process_timestep(std::int64_t t, const std::string& trigger) {
    struct Staged {
        std::string target;
        std::vector<std::string> columns;
        std::vector<Row> rows;
    };
    const Catalog& cat = plan_.program.catalog;
    Database& db = coordinator_db();
    processing_ = true;
    try {
        std::set<std::string> changed = committed_;
        changed.insert(trigger);
        committed_.clear();

        for (const auto& v : materialization_.views) {
            const auto& deps = materialization_.refresh_deps.at(v);
            if (std::any_of(deps.begin(), deps.end(), [&](const std::string& d) { return changed.count(d); }))
                refresh(v);
        }

        // Program bodies read the state as of t; their inserts land after rendering.
        std::vector<Staged> staged;
        for (const auto& p : cat.programs) {
            bool fires = std::any_of(p.triggers.begin(), p.triggers.end(),
                                     [&](const std::string& tr) { return iequals(tr, trigger); });
            if (!fires) continue;
            for (const auto& cmd : p.desugared) {
                if (const auto* ins = std::get_if<InsertStatement>(&cmd)) {
                    const RelationDef& target = cat.at(ins->target);
                    auto rs = db.query(print_query(ins->query, PrintMode::Sql), {}, "program " + p.name);
                    auto cols = ins->columns.empty() ? target.user_column_names() : ins->columns;
                    staged.push_back(Staged{target.name, std::move(cols), std::move(rs.rows)});
                } else {
                    db.query(print_query(std::get<Query>(cmd), PrintMode::Sql), {}, "program " + p.name);
                }
            }
        }

        std::vector<OutputFrame> frames;
        for (const auto& out : outputs_) {
            const auto& deps = closure_[out];
            if (std::none_of(changed.begin(), changed.end(), [&](const std::string& c) { return deps.count(c); }))
                continue;
            OutputFrame f = evaluate_output(out);
            f.timestep = t;
            frames.push_back(std::move(f));
        }

        std::set<std::string> checked;
        auto check_not_empty = [&](const ViewConstraint& c) {
            const RelationDef* rel = cat.find(c.view);
            if (!rel || !checked.insert(rel->name).second) return;
            auto names = db.relation_names();
            if (std::find(names.begin(), names.end(), rel->name) == names.end()) return;
            auto rs = db.query("SELECT 1 FROM " + quote_ident(rel->name) + " LIMIT 1", {}, "NOT EMPTY " + rel->name);
            if (rs.rows.empty())
                diagnostics_.push_back(Diagnostic{Severity::Warning, "NotEmpty",
                                                  "view " + rel->name + " is empty at timestep " + std::to_string(t),
                                                  t});
        };
        for (const auto& c : cat.constraints) check_not_empty(c);
        for (const auto& rel : cat.relations())
            for (const auto& c : rel.constraints) check_not_empty(c);

        render(std::move(frames));

        for (auto& s : staged) {
            for (auto& r : s.rows) r.emplace_back(t);
            auto cols = s.columns;
            cols.emplace_back(kTimestep);
            db.insert_rows(s.target, cols, s.rows);
            committed_.insert(s.target);
        }
    } catch (...) {
        processing_ = false;
        throw;
    }
    processing_ = false;
}

void Session::render(std::vector<OutputFrame> frames) {
    for (auto& f : frames) {
        auto last = last_rows_.find(f.output);
        bool same = last != last_rows_.end() && last->second == f.rows;
        last_rows_[f.output] = f.rows;
        if (options_.dedupe_frames && same) continue;
        frames_.push_back(f);
        if (auto it = callbacks_.find(f.output); it != callbacks_.end())
            for (const auto& cb : it->second) cb(frames_.back());
    }
}

std::int64_t Session::run_until_quiescent(std::int64_t deadline_ms) {
    return federation_->run_until_quiescent(deadline_ms);
}

RunStats Session::stats() const {
    RunStats s;
    s.events = events_;
    s.async_results = async_results_;
    s.frames = frames_.size();
    s.eval_requests = eval_requests_;
    s.remote_messages = federation_->remote_message_count();
    s.cache_hits = cache_.hits();
    s.cache_misses = cache_.misses();
    s.diagnostics = diagnostics_.size();
    s.materialized_views = materialization_.views.size();
    return s;
}

}  // namespace diel
