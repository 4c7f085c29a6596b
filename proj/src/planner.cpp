// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/planner.hpp"

#include <algorithm>
#include <sstream>

#include "diel/lexer.hpp"
#include "diel/parser.hpp"

namespace diel {

namespace {

const Query& query_of(const RelationDef& rel) {
    return rel.query ? *rel.query : *rel.source_query;
}

bool is_stored(const RelationDef& rel) { return !rel.is_query_backed() || rel.kind == RelationKind::AsyncView; }

std::vector<std::string> view_closure(const Query& q, const Catalog& catalog) {
    // Views and outputs reachable from q, dependencies first.
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto visit = [&](auto&& self, const Query& query) -> void {
        for_each_table_ref(query, [&](const TableRef& t) {
            const RelationDef& rel = catalog.at(t.relation);
            if (is_stored(rel) || !seen.insert(rel.name).second) return;
            self(self, query_of(rel));
            out.push_back(rel.name);
        });
    };
    visit(visit, q);
    return out;
}

std::string sql_of(const RelationDef& rel) { return relation_query_sql(rel); }

std::string coordinator_of(const std::vector<DbDescriptor>& dbs) {
    std::string id;
    for (const auto& d : dbs) {
        if (d.kind != DbKind::InProcess) continue;
        if (!id.empty())
            throw Error(ErrorCode::ConfigError,
                        "two in-process databases ('" + id + "', '" + d.id + "'); exactly one is allowed");
        id = d.id;
    }
    if (id.empty()) throw Error(ErrorCode::ConfigError, "no in-process (quick) database configured");
    return id;
}

}  // namespace

std::string_view db_kind_name(DbKind kind) {
    switch (kind) {
    case DbKind::InProcess: return "InProcess";
    case DbKind::Worker: return "Worker";
    case DbKind::Remote: return "Remote";
    }
    return "?";
}

const DbDescriptor& FederationPlan::db(std::string_view id) const {
    for (const auto& d : dbs)
        if (d.id == id) return d;
    throw Error(ErrorCode::ConfigError, "unknown database '" + std::string(id) + "'");
}

DbDescriptor describe_database(std::string id, DbKind kind, Database& db, LatencySpec latency) {
    DbDescriptor out{std::move(id), kind, {}, std::move(latency)};
    auto tables = db.query(
        "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
        "ORDER BY name");
    for (const auto& row : tables.rows) {
        const auto& name = std::get<std::string>(row.at(0));
        ExternalRelation rel{name, {}, out.id, 0};
        for (const auto& m : db.table_columns(name))
            rel.columns.push_back(ColumnDef{m.name, column_type_from_decl(m.decltype_name), {}});
        auto count = db.query("SELECT COUNT(*) FROM " + quote_ident(name));
        rel.row_estimate = std::get<std::int64_t>(count.rows.at(0).at(0));
        out.relations.push_back(std::move(rel));
    }
    return out;
}

// ── placement and leaders ──────────────────────────────────────

std::vector<std::string> stored_inputs(const Query& query, const Catalog& catalog) {
    std::set<std::string> out;
    std::set<std::string> seen;
    auto visit = [&](auto&& self, const Query& q) -> void {
        for_each_table_ref(q, [&](const TableRef& t) {
            const RelationDef& rel = catalog.at(t.relation);
            if (is_stored(rel)) {
                out.insert(rel.name);
            } else if (seen.insert(rel.name).second) {
                self(self, query_of(rel));
            }
        });
    };
    visit(visit, query);
    return {out.begin(), out.end()};
}

Estimates planning_estimates(const Catalog& catalog) {
    Estimates out;
    for (const auto& rel : catalog.relations()) {
        if (!is_stored(rel)) continue;
        out[rel.name] = rel.external ? rel.row_estimate : std::max<std::int64_t>(1, rel.row_estimate);
    }
    return out;
}

std::int64_t shipping_cost(const std::vector<std::string>& inputs, const Placement& placement,
                           const Estimates& estimates, const std::string& db) {
    std::int64_t cost = 0;
    for (const auto& r : inputs) {
        auto p = placement.find(r);
        if (p != placement.end() && p->second == db) continue;
        auto e = estimates.find(r);
        if (e == estimates.end())
            throw Error(ErrorCode::UnsupportedSpan, "no row estimate for '" + r + "'");
        cost += e->second;
    }
    return cost;
}

std::string choose_leader(const std::vector<std::string>& inputs, const Placement& placement,
                          const Estimates& estimates, const std::vector<DbDescriptor>& dbs) {
    std::string coordinator = coordinator_of(dbs);
    std::vector<std::string> candidates{coordinator};
    std::vector<std::string> others;
    for (const auto& d : dbs)
        if (d.id != coordinator) others.push_back(d.id);
    std::sort(others.begin(), others.end());
    candidates.insert(candidates.end(), others.begin(), others.end());

    std::string best;
    std::int64_t best_cost = 0;
    for (const auto& c : candidates) {
        std::int64_t cost = shipping_cost(inputs, placement, estimates, c);
        if (best.empty() || cost < best_cost) {
            best = c;
            best_cost = cost;
        }
    }
    return best;
}

Placement locate_relations(const Catalog& catalog, const std::vector<DbDescriptor>& dbs) {
    std::string coordinator = coordinator_of(dbs);
    std::map<std::string, std::string> home;
    for (const auto& d : dbs)
        for (const auto& r : d.relations) {
            auto [it, fresh] = home.emplace(to_lower(r.name), d.id);
            if (!fresh)
                throw Error(ErrorCode::DuplicateRelation, "base relation '" + r.name +
                                                              "' exists in both '" + it->second +
                                                              "' and '" + d.id + "'");
        }

    Placement out;
    for (const auto& rel : catalog.relations()) {
        if (rel.external) {
            auto it = home.find(to_lower(rel.name));
            if (it == home.end() || it->second != rel.home_db)
                throw Error(ErrorCode::UnknownRelation,
                            "base relation '" + rel.name + "' is not in database '" + rel.home_db + "'");
            out[rel.name] = it->second;
        } else if (is_stored(rel) || rel.kind == RelationKind::Output) {
            out[rel.name] = coordinator;
        }
    }
    Estimates est = planning_estimates(catalog);
    for (const auto& rel : catalog.relations())
        if (rel.kind == RelationKind::View)
            out[rel.name] = choose_leader(stored_inputs(query_of(rel), catalog), out, est, dbs);
    return out;
}

// ── output rewriting ───────────────────────────────────────────

OutputRewrite rewrite_remote_output(const RelationDef& output, const Catalog& catalog,
                                    const std::vector<std::string>& event_tables) {
    OutputRewrite out;
    std::string name = output.name + "Event";
    while (catalog.find(name)) name += "_";

    std::vector<std::string> original = output.user_column_names();
    std::vector<std::string> renamed = async_result_names(original);

    RelationDef& av = out.async_view;
    av.name = name;
    av.kind = RelationKind::AsyncView;
    av.source_query = output.source_query;
    for (const auto& n : renamed) av.columns.push_back(ColumnDef{n, ColumnType::Any, std::nullopt});

    Query q;
    for (std::size_t i = 0; i < original.size(); ++i)
        q.items.push_back(SelectItem{ColumnRef{"e", renamed[i]}, original[i]});
    FromItem result;
    result.source = TableRef{name, "e", false, false};
    q.from.push_back(std::move(result));

    auto ref = [](const std::string& qual, std::string_view col) {
        return Expr(ColumnRef{qual, std::string(col)});
    };
    auto max_of = [](const std::string& rel) {
        Query sub;
        sub.items.push_back(SelectItem{FuncCall{"MAX", {ColumnRef{std::nullopt, std::string(kTimestep)}}, false},
                                       std::nullopt});
        FromItem f;
        f.source = TableRef{rel, std::nullopt, false, false};
        sub.from.push_back(std::move(f));
        return Expr(Subquery{Box<Query>(std::move(sub))});
    };

    bool latest_ref = false;
    if (event_tables.size() == 1)
        for_each_table_ref(query_of(output), [&](const TableRef& t) {
            if (t.latest && iequals(t.relation, event_tables[0])) latest_ref = true;
        });
    // Fall back to the source query when the desugared one is all we have.
    if (event_tables.size() == 1 && !latest_ref && output.source_query)
        for_each_table_ref(*output.source_query, [&](const TableRef& t) {
            if (t.latest && iequals(t.relation, event_tables[0])) latest_ref = true;
        });

    if (event_tables.empty()) {
        std::get<TableRef>(q.from[0].source).latest_request = true;
    } else if (event_tables.size() == 1 && latest_ref) {
        FromItem join;
        join.join = JoinKind::Inner;
        join.source = TableRef{event_tables[0], "i", true, false};
        join.on = Binary{BinaryOp::Eq, ref("i", kTimestep), ref("e", kRequestTimestep)};
        q.from.push_back(std::move(join));
    } else if (event_tables.size() == 1) {
        q.where = Binary{BinaryOp::Eq, ref("e", kRequestTimestep), max_of(event_tables[0])};
    } else {
        FuncCall latest{"MAX", {}, false};
        for (const auto& e : event_tables)
            latest.args.push_back(FuncCall{"COALESCE", {max_of(e), Literal{std::int64_t{0}}}, false});
        q.where = Binary{BinaryOp::Eq, ref("e", kRequestTimestep), Expr(std::move(latest))};
    }
    if (!query_of(output).order_by.empty())
        q.order_by.push_back(OrderItem{ref("e", "rowid"), false});

    RelationDef& co = out.coordinator_output;
    co.name = output.name;
    co.kind = RelationKind::Output;
    co.source_query = std::move(q);
    co.constraints = output.constraints;
    return out;
}

// ── plan ───────────────────────────────────────────────────────

FederationPlan plan_federation(const CompiledProgram& program, const std::vector<DbDescriptor>& dbs) {
    FederationPlan plan;
    plan.coordinator = coordinator_of(dbs);
    plan.dbs = dbs;
    const Catalog& cat = program.catalog;

    Placement initial = locate_relations(cat, dbs);
    auto is_remote = [&](const std::string& rel) {
        auto it = initial.find(rel);
        return it != initial.end() && it->second != plan.coordinator;
    };
    auto check_span = [&](const std::string& owner, const std::vector<std::string>& inputs) {
        for (const auto& r : inputs) {
            RelationKind k = cat.at(r).kind;
            if (k == RelationKind::HistoryTable || k == RelationKind::AsyncView)
                throw Error(ErrorCode::UnsupportedSpan,
                            owner + " reads remote data together with " +
                                std::string(relation_kind_name(k)) + " '" + r +
                                "', which only exists at the coordinator");
        }
    };
    auto event_tables_of = [&](const Catalog& c, const std::vector<std::string>& inputs) {
        std::vector<std::string> out;
        for (const auto& r : inputs)
            if (c.at(r).kind == RelationKind::EventTable) out.push_back(r);
        return out;
    };

    // Outputs reading remote data become async view + coordinator output.
    std::map<std::string, OutputRewrite> rewrites;
    for (const auto& rel : cat.relations()) {
        if (rel.kind != RelationKind::Output) continue;
        auto inputs = stored_inputs(query_of(rel), cat);
        if (std::none_of(inputs.begin(), inputs.end(), is_remote)) continue;
        check_span("output " + rel.name, inputs);
        rewrites.emplace(rel.name, rewrite_remote_output(rel, cat, event_tables_of(cat, inputs)));
    }
    for (const auto& p : cat.programs)
        for (const auto& cmd : p.commands) {
            const Query& q = std::holds_alternative<Query>(cmd) ? std::get<Query>(cmd)
                                                                : std::get<InsertStatement>(cmd).query;
            auto inputs = stored_inputs(q, cat);
            if (std::any_of(inputs.begin(), inputs.end(), is_remote))
                throw Error(ErrorCode::UnsupportedSpan,
                            "program " + p.name + " reads data that is not at the coordinator");
        }

    if (rewrites.empty()) {
        plan.program = program;
    } else {
        std::vector<Statement> stmts;
        for (auto& s : catalog_statements(cat)) {
            auto it = rewrites.find(s.name);
            if (s.kind == StatementKind::CreateOutput && it != rewrites.end()) {
                Statement av;
                av.kind = StatementKind::CreateAsyncView;
                av.name = it->second.async_view.name;
                av.body = *it->second.async_view.source_query;
                stmts.push_back(std::move(av));
                s.body = *it->second.coordinator_output.source_query;
                plan.rewritten_outputs[it->first] = it->second.async_view.name;
            }
            stmts.push_back(std::move(s));
        }
        plan.program = compile(stmts, CompileOptions{catalog_externals(cat)});
    }

    const Catalog& rc = plan.program.catalog;
    plan.placement = locate_relations(rc, dbs);
    Estimates est = planning_estimates(rc);
    for (const auto& rel : rc.relations()) {
        if (rel.kind != RelationKind::AsyncView) continue;
        auto inputs = stored_inputs(query_of(rel), rc);
        for (const auto& r : inputs)
            if (rc.at(r).kind == RelationKind::AsyncView)
                throw Error(ErrorCode::UnsupportedSpan,
                            "async view " + rel.name + " reads async view '" + r + "'");
        std::string leader = choose_leader(inputs, plan.placement, est, dbs);
        if (leader != plan.coordinator) check_span("async view " + rel.name, inputs);
        plan.leaders[rel.name] = leader;
        plan.event_deps[rel.name] = event_tables_of(rc, inputs);
        for (const auto& r : inputs) {
            const RelationDef& in = rc.at(r);
            if (plan.placement.at(r) == leader) continue;
            if (in.kind == RelationKind::EventTable) {
                plan.shipments[r].insert(leader);
            } else if (in.kind == RelationKind::Table) {
                bool dup = std::any_of(plan.snapshots.begin(), plan.snapshots.end(), [&](const Snapshot& s) {
                    return s.relation == r && s.to == leader;
                });
                if (!dup) plan.snapshots.push_back(Snapshot{r, plan.placement.at(r), leader});
            }
        }
    }
    emit_per_db_sql(plan);
    return plan;
}

void emit_per_db_sql(FederationPlan& plan) {
    const Catalog& cat = plan.program.catalog;
    const auto& order = plan.program.graph.topo_order;
    plan.programs.clear();
    for (const auto& d : plan.dbs) plan.programs[d.id];

    // Stored relations available at each instance.
    std::map<std::string, std::set<std::string>> available;
    for (const auto& [rel, db] : plan.placement)
        if (is_stored(cat.at(rel))) available[db].insert(rel);
    for (const auto& s : plan.snapshots) available[s.to].insert(s.relation);
    for (const auto& [rel, dests] : plan.shipments)
        for (const auto& d : dests) available[d].insert(rel);

    for (const auto& rel : cat.relations()) {
        if (!rel.external) continue;
        plan.programs[plan.placement.at(rel.name)].base_ddl.push_back(create_table_sql(rel));
    }

    // Coordinator: stored relations, cache table, then evaluable views in order.
    DbProgram& coord = plan.programs[plan.coordinator];
    for (const auto& rel : cat.relations())
        if (is_stored(rel) && !rel.external) coord.setup.push_back(create_table_sql(rel));
    for (const auto& s : plan.snapshots)
        if (s.to == plan.coordinator) coord.setup.push_back(create_table_sql(cat.at(s.relation)));
    coord.setup.push_back(
        "CREATE TABLE request_cache (hash TEXT PRIMARY KEY, dataId INTEGER NOT NULL, "
        "viewName TEXT NOT NULL)");
    for (const auto& node : order) {
        const RelationDef* rel = cat.find(node);
        if (!rel || (rel->kind != RelationKind::View && rel->kind != RelationKind::Output)) continue;
        auto inputs = stored_inputs(query_of(*rel), cat);
        bool local = std::all_of(inputs.begin(), inputs.end(), [&](const std::string& r) {
            return available[plan.coordinator].count(r) > 0;
        });
        if (!local) continue;
        if (rel->materialized)
            coord.setup.push_back("CREATE TABLE " + quote_ident(rel->name) + " AS SELECT * FROM (" +
                                  sql_of(*rel) + ") LIMIT 0");
        else
            coord.setup.push_back("CREATE VIEW " + quote_ident(rel->name) + " AS " + sql_of(*rel));
    }

    // Leaders: shadows, snapshots, the views their queries need, named queries.
    for (const auto& d : plan.dbs) {
        if (d.id == plan.coordinator) {
            for (const auto& [av, leader] : plan.leaders)
                if (leader == d.id) coord.named_queries[av] = sql_of(cat.at(av));
            continue;
        }
        DbProgram& prog = plan.programs[d.id];
        for (const auto& s : plan.snapshots)
            if (s.to == d.id) prog.setup.push_back(create_table_sql(cat.at(s.relation)));
        for (const auto& [rel, dests] : plan.shipments)
            if (dests.count(d.id)) prog.setup.push_back(create_table_sql(cat.at(rel)));
        std::set<std::string> views;
        for (const auto& [av, leader] : plan.leaders) {
            if (leader != d.id) continue;
            prog.named_queries[av] = sql_of(cat.at(av));
            for (const auto& v : view_closure(query_of(cat.at(av)), cat)) views.insert(v);
        }
        for (const auto& node : order)
            if (views.count(node))
                prog.setup.push_back("CREATE VIEW " + quote_ident(node) + " AS " + sql_of(cat.at(node)));
    }
}

std::string per_db_sql_text(const FederationPlan& plan, const std::string& db) {
    const DbProgram& p = plan.programs.at(db);
    std::ostringstream os;
    os << "-- instance " << db << " (" << db_kind_name(plan.db(db).kind) << ")\n";
    if (!p.base_ddl.empty()) os << "-- base relations\n";
    for (const auto& s : p.base_ddl) os << s << ";\n";
    if (!p.setup.empty()) os << "-- setup\n";
    for (const auto& s : p.setup) os << s << ";\n";
    for (const auto& [name, sql] : p.named_queries) os << "-- query " << name << ": " << sql << "\n";
    return os.str();
}

std::string dump_plan(const FederationPlan& plan) {
    std::ostringstream os;
    os << "coordinator " << plan.coordinator << "\n";
    os << "databases\n";
    for (const auto& d : plan.dbs) {
        os << "  " << d.id << " " << db_kind_name(d.kind);
        if (d.kind != DbKind::InProcess) os << " latency " << latency_to_string(d.latency);
        os << "\n";
        for (const auto& r : d.relations) os << "    " << r.name << " rows=" << r.row_estimate << "\n";
    }
    os << "placement\n";
    for (const auto& rel : plan.program.catalog.relations())
        if (auto it = plan.placement.find(rel.name); it != plan.placement.end())
            os << "  " << rel.name << " " << relation_kind_name(rel.kind) << " @" << it->second << "\n";
    os << "leaders\n";
    for (const auto& [av, leader] : plan.leaders) os << "  " << av << " @" << leader << "\n";
    os << "rewritten\n";
    for (const auto& [out, av] : plan.rewritten_outputs) os << "  " << out << " <- " << av << "\n";
    os << "shipments\n";
    for (const auto& [rel, dests] : plan.shipments)
        for (const auto& d : dests) os << "  " << rel << " -> " << d << " per event\n";
    for (const auto& s : plan.snapshots)
        os << "  " << s.relation << " " << s.from << " -> " << s.to << " snapshot\n";
    for (const auto& d : plan.dbs) os << per_db_sql_text(plan, d.id);
    return os.str();
}

}  // namespace diel
