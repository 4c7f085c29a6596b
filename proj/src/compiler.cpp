// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/compiler.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "diel/lexer.hpp"
#include "diel/parser.hpp"

namespace diel {

namespace {

Expr conjoin(std::optional<Expr> existing, Expr added) {
    if (!existing) return added;
    return Binary{BinaryOp::And, Box<Expr>(std::move(*existing)), Box<Expr>(std::move(added))};
}

Expr max_subquery(const std::string& relation, std::string_view column) {
    Query sub;
    FuncCall max{"MAX", {ColumnRef{std::nullopt, std::string(column)}}, false};
    sub.items.push_back(SelectItem{std::move(max), std::nullopt});
    FromItem from;
    from.source = TableRef{relation, std::nullopt, false, false};
    sub.from.push_back(std::move(from));
    return Subquery{Box<Query>(std::move(sub))};
}

}  // namespace

ColumnType column_type_from_decl(std::string_view decl) {
    std::string up = to_upper(decl);
    if (up.find("INT") != std::string::npos) return ColumnType::Int;
    if (up.find("REAL") != std::string::npos || up.find("FLOA") != std::string::npos ||
        up.find("DOUB") != std::string::npos)
        return ColumnType::Real;
    if (up.find("TEXT") != std::string::npos || up.find("CHAR") != std::string::npos)
        return ColumnType::Text;
    return ColumnType::Any;
}

namespace {

std::string sql_type(ColumnType t) {
    switch (t) {
    case ColumnType::Int: return " INTEGER";
    case ColumnType::Real: return " REAL";
    case ColumnType::Text: return " TEXT";
    case ColumnType::Any: return "";
    }
    return "";
}

[[noreturn]] void rethrow_with_context(const Error& e, const std::string& context,
                                       ErrorCode fallback) {
    ErrorCode code = e.code() == ErrorCode::EngineError ? fallback : e.code();
    throw Error(code, context + ": " + e.what());
}

// ── star arguments ─────────────────────────────────────────────

using Scope = std::map<std::string, const RelationDef*>;

void expand_query(Query& q, const Catalog& cat, std::vector<Scope>& stack);

void expand_expr(Expr& e, const Catalog& cat, std::vector<Scope>& stack) {
    if (auto* f = std::get_if<FuncCall>(&e.node)) {
        std::vector<Expr> args;
        for (auto& a : f->args) {
            auto* star = std::get_if<Star>(&a.node);
            if (!star || !star->qualifier) {
                args.push_back(std::move(a));
                continue;
            }
            const RelationDef* rel = nullptr;
            for (auto it = stack.rbegin(); it != stack.rend() && !rel; ++it) {
                auto found = it->find(to_lower(*star->qualifier));
                if (found != it->end()) rel = found->second;
            }
            if (!rel)
                throw Error(ErrorCode::UnknownRelation,
                            "'" + *star->qualifier + ".*' names no relation in scope");
            for (const auto& c : rel->columns)
                args.push_back(ColumnRef{*star->qualifier, c.name});
        }
        f->args = std::move(args);
    }
    auto on_expr = [&](Expr& c) { expand_expr(c, cat, stack); };
    auto on_query = [&](Query& q) { expand_query(q, cat, stack); };
    detail::expr_children(e, on_expr, on_query);
}

void expand_query(Query& q, const Catalog& cat, std::vector<Scope>& stack) {
    Scope scope;
    for (auto& f : q.from) {
        if (auto* t = std::get_if<TableRef>(&f.source)) {
            if (auto* rel = cat.find(t->relation)) scope[to_lower(t->visible_name())] = rel;
        } else {
            expand_query(*std::get<DerivedTable>(f.source).query, cat, stack);
        }
    }
    stack.push_back(std::move(scope));
    for_each_clause_expr(q, [&](Expr& e) { expand_expr(e, cat, stack); });
    stack.pop_back();
}

// ── graph ──────────────────────────────────────────────────────

std::vector<std::string> query_dependencies(const Query& q, const Catalog& cat,
                                            const std::string& owner) {
    std::vector<std::string> out;
    for_each_table_ref(q, [&](const TableRef& t) {
        const RelationDef* rel = cat.find(t.relation);
        if (!rel)
            throw Error(ErrorCode::UnknownRelation,
                        owner + " reads unknown relation '" + t.relation + "'");
        if (std::find(out.begin(), out.end(), rel->name) == out.end()) out.push_back(rel->name);
    });
    return out;
}

std::string describe_cycle(const DependencyGraph& g, const std::set<std::string>& remaining) {
    // Walk dependencies inside the unresolved set until a node repeats.
    std::string start = *remaining.begin();
    std::vector<std::string> path{start};
    std::map<std::string, std::size_t> pos{{start, 0}};
    std::string cur = start;
    for (;;) {
        std::string next;
        for (const auto& d : g.dependencies(cur))
            if (remaining.count(d)) {
                next = d;
                break;
            }
        if (next.empty()) break;
        if (pos.count(next)) {
            std::vector<std::string> cycle(path.begin() + static_cast<long>(pos[next]), path.end());
            cycle.push_back(next);
            std::string text;
            for (std::size_t i = 0; i < cycle.size(); ++i) text += (i ? " -> " : "") + cycle[i];
            return text;
        }
        pos[next] = path.size();
        path.push_back(next);
        cur = next;
    }
    return start;
}

void check_columns_unique(const std::string& rel, const std::vector<ColumnDef>& cols) {
    std::set<std::string> seen;
    for (const auto& c : cols)
        if (!seen.insert(to_lower(c.name)).second)
            throw Error(ErrorCode::TypeCheckError,
                        "relation '" + rel + "' declares column '" + c.name + "' twice");
}

std::vector<ColumnDef> result_columns(const std::vector<ColumnMeta>& metas) {
    std::vector<std::string> names;
    for (const auto& m : metas) names.push_back(m.name);
    std::vector<ColumnDef> out;
    for (auto& n : async_result_names(names)) out.push_back(ColumnDef{n, ColumnType::Any, std::nullopt});
    return out;
}

}  // namespace

std::vector<std::string> async_result_names(const std::vector<std::string>& names) {
    std::vector<std::string> out;
    std::set<std::string> used;
    for (std::string name : names) {
        while (is_system_column(name) || used.count(to_lower(name))) name += "_";
        used.insert(to_lower(name));
        out.push_back(std::move(name));
    }
    return out;
}

std::vector<Statement> catalog_statements(const Catalog& catalog) {
    std::vector<Statement> out;
    for (const auto& rel : catalog.relations()) {
        if (rel.external) continue;
        Statement s;
        s.name = rel.name;
        switch (rel.kind) {
        case RelationKind::EventTable:
        case RelationKind::Table:
        case RelationKind::HistoryTable:
            s.kind = rel.kind == RelationKind::EventTable ? StatementKind::CreateEventTable
                                                          : StatementKind::CreateTable;
            s.body = rel.columns;
            break;
        case RelationKind::View: s.kind = StatementKind::CreateView; break;
        case RelationKind::AsyncView: s.kind = StatementKind::CreateAsyncView; break;
        case RelationKind::Output: s.kind = StatementKind::CreateOutput; break;
        }
        if (rel.is_query_backed()) s.body = *rel.source_query;
        out.push_back(std::move(s));
    }
    for (const auto& p : catalog.programs) {
        Statement s;
        s.kind = StatementKind::CreateProgram;
        s.name = p.name;
        s.body = ProgramBody{p.triggers, p.commands};
        out.push_back(std::move(s));
    }
    for (const auto& c : catalog.constraints) {
        Statement s;
        s.kind = StatementKind::Constraint;
        s.name = c.view;
        s.body = c;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<ExternalRelation> catalog_externals(const Catalog& catalog) {
    std::vector<ExternalRelation> out;
    for (const auto& rel : catalog.relations())
        if (rel.external) out.push_back({rel.name, rel.columns, rel.home_db, rel.row_estimate});
    return out;
}

// ── templates ──────────────────────────────────────────────────

std::vector<Statement> expand_templates(const std::vector<Statement>& statements) {
    std::map<std::string, const Statement*> templates;
    for (const auto& s : statements) {
        if (s.kind != StatementKind::CreateTemplate) continue;
        if (!templates.emplace(to_lower(s.name), &s).second)
            throw Error(ErrorCode::DuplicateRelation, "template '" + s.name + "' is defined twice");
    }
    std::vector<Statement> out;
    for (const auto& s : statements) {
        if (s.kind == StatementKind::CreateTemplate) continue;
        const auto* use = std::get_if<TemplateUse>(&s.body);
        if (!use) {
            out.push_back(s);
            continue;
        }
        auto it = templates.find(to_lower(use->template_name));
        if (it == templates.end())
            throw Error(ErrorCode::UnknownTemplate,
                        s.name + " uses unknown template '" + use->template_name + "'");
        const auto& def = std::get<TemplateDef>(it->second->body);
        std::map<std::string, std::string> bound;
        for (const auto& [var, value] : use->bindings) {
            if (std::find(def.params.begin(), def.params.end(), var) == def.params.end())
                throw Error(ErrorCode::MissingBinding, s.name + " binds '" + var +
                                                           "', which template '" + it->second->name +
                                                           "' does not declare");
            bound[var] = value;
        }
        for (const auto& p : def.params)
            if (!bound.count(p))
                throw Error(ErrorCode::MissingBinding,
                            s.name + " does not bind template variable '" + p + "'");

        std::vector<RawToken> tokens;
        const auto& body = def.body;
        for (std::size_t i = 0; i < body.size(); ++i) {
            bool site = body[i].kind == RawToken::Kind::Symbol && body[i].text == "{" &&
                        i + 2 < body.size() && body[i + 1].kind == RawToken::Kind::Word &&
                        body[i + 2].kind == RawToken::Kind::Symbol && body[i + 2].text == "}";
            if (!site) {
                tokens.push_back(body[i]);
                continue;
            }
            auto b = bound.find(body[i + 1].text);
            if (b == bound.end())
                throw Error(ErrorCode::MissingBinding, "template '" + it->second->name +
                                                           "' uses undeclared variable {" +
                                                           body[i + 1].text + "}");
            tokens.push_back(RawToken{RawToken::Kind::Word, b->second});
            i += 2;
        }
        std::string text = raw_tokens_text(tokens);
        Statement expanded = s;
        try {
            expanded.body = parse_query(text);
        } catch (const SyntaxError& e) {
            throw Error(ErrorCode::SubstitutionParseError,
                        s.name + ": expanded template '" + it->second->name +
                            "' does not parse: " + e.what() + " in: " + text);
        }
        out.push_back(std::move(expanded));
    }
    return out;
}

// ── schema copy ────────────────────────────────────────────────

std::vector<Statement> resolve_schema_copy(const std::vector<Statement>& statements,
                                           const Catalog& catalog) {
    std::map<std::string, std::vector<ColumnDef>> known;
    for (const auto& r : catalog.relations())
        if (!r.is_query_backed()) known[to_lower(r.name)] = r.columns;
    std::vector<Statement> out;
    for (const auto& s : statements) {
        Statement t = s;
        if (s.kind == StatementKind::CreateTableAsSchemaCopy) {
            const auto& src = std::get<SchemaCopy>(s.body).source;
            auto it = known.find(to_lower(src));
            if (it == known.end())
                throw Error(ErrorCode::UnknownSourceRelation,
                            s.name + " copies the schema of '" + src +
                                "', which is not a table declared before it");
            std::vector<ColumnDef> cols;
            for (const auto& c : it->second) cols.push_back(ColumnDef{c.name, c.type, std::nullopt});
            t.kind = s.copy_into_event_table ? StatementKind::CreateEventTable
                                             : StatementKind::CreateTable;
            t.copy_into_event_table = false;
            t.body = cols;
        }
        if (t.kind == StatementKind::CreateEventTable || t.kind == StatementKind::CreateTable)
            known[to_lower(t.name)] = std::get<std::vector<ColumnDef>>(t.body);
        out.push_back(std::move(t));
    }
    return out;
}

// ── LATEST ─────────────────────────────────────────────────────

Query desugar_latest(const Query& query, const Catalog& catalog) {
    Query out = query;
    for_each_query(out, [&](Query& q) {
        for (auto& f : q.from) {
            auto* t = std::get_if<TableRef>(&f.source);
            if (!t || !(t->latest || t->latest_request)) continue;
            const RelationDef& rel = catalog.at(t->relation);
            std::string_view col = t->latest ? kTimestep : kRequestTimestep;
            bool has = std::any_of(rel.system_columns.begin(), rel.system_columns.end(),
                                   [&](const std::string& c) { return c == col; });
            if (!has)
                throw Error(ErrorCode::LatestOnNonEvent,
                            std::string(t->latest ? "LATEST" : "LATEST_REQUEST") + " on '" +
                                rel.name + "', which has no " + std::string(col) + " column");
            Expr cond = Binary{BinaryOp::Eq,
                               Box<Expr>(ColumnRef{t->visible_name(), std::string(col)}),
                               Box<Expr>(max_subquery(rel.name, col))};
            t->latest = t->latest_request = false;
            if (f.join == JoinKind::Left) f.on = conjoin(std::move(f.on), std::move(cond));
            else q.where = conjoin(std::move(q.where), std::move(cond));
        }
    });
    return out;
}

Query expand_star_arguments(const Query& query, const Catalog& catalog) {
    Query out = query;
    std::vector<Scope> stack;
    expand_query(out, catalog, stack);
    return out;
}

// ── system columns ─────────────────────────────────────────────

void augment_system_columns(Catalog& catalog) {
    for (auto& rel : catalog.relations()) {
        if (rel.external) continue;
        if (!rel.is_query_backed()) {
            for (const auto& c : rel.columns)
                if (is_system_column(c.name))
                    throw Error(ErrorCode::ReservedColumnName,
                                "column '" + c.name + "' of '" + rel.name +
                                    "' shadows a system column");
        }
        switch (rel.kind) {
        case RelationKind::EventTable:
            rel.system_columns = {std::string(kTimestep), std::string(kTimestamp)};
            break;
        case RelationKind::AsyncView:
            rel.system_columns = {std::string(kTimestep), std::string(kTimestamp),
                                  std::string(kRequestTimestep)};
            break;
        case RelationKind::HistoryTable: rel.system_columns = {std::string(kTimestep)}; break;
        default: rel.system_columns.clear(); break;
        }
    }
}

// ── dependency graph ───────────────────────────────────────────

DependencyGraph build_dependency_graph(const Catalog& catalog) {
    DependencyGraph g;
    std::map<std::string, std::size_t> order;
    for (const auto& rel : catalog.relations()) {
        order[rel.name] = g.nodes.size();
        g.nodes.push_back(rel.name);
    }
    for (const auto& p : catalog.programs) {
        order[program_node(p.name)] = g.nodes.size();
        g.nodes.push_back(program_node(p.name));
    }
    for (const auto& rel : catalog.relations()) {
        const Query* q = rel.source_query ? &*rel.source_query : rel.query ? &*rel.query : nullptr;
        if (!q) continue;
        for (const auto& d : query_dependencies(*q, catalog, "'" + rel.name + "'"))
            g.edges.push_back(Edge{rel.name, d, EdgeKind::Reads});
    }
    for (const auto& p : catalog.programs) {
        std::string node = program_node(p.name);
        for (const auto& t : p.triggers)
            g.edges.push_back(Edge{node, catalog.at(t).name, EdgeKind::Triggers});
        for (const auto& cmd : p.commands) {
            const Query* q = nullptr;
            if (auto* ins = std::get_if<InsertStatement>(&cmd)) {
                g.edges.push_back(Edge{catalog.at(ins->target).name, node, EdgeKind::StagedWrite});
                q = &ins->query;
            } else {
                q = &std::get<Query>(cmd);
            }
            for (const auto& d : query_dependencies(*q, catalog, "program " + p.name))
                if (!g.has_edge(node, d)) g.edges.push_back(Edge{node, d, EdgeKind::Reads});
        }
    }

    // Kahn's algorithm, ties broken by declaration order.
    std::map<std::string, std::size_t> pending;
    for (const auto& n : g.nodes) pending[n] = g.dependencies(n).size();
    std::set<std::pair<std::size_t, std::string>> ready;
    for (const auto& [n, c] : pending)
        if (c == 0) ready.emplace(order[n], n);
    while (!ready.empty()) {
        auto [idx, n] = *ready.begin();
        ready.erase(ready.begin());
        g.topo_order.push_back(n);
        for (const auto& c : g.consumers(n))
            if (--pending[c] == 0) ready.emplace(order[c], c);
    }
    if (g.topo_order.size() != g.nodes.size()) {
        std::set<std::string> remaining(g.nodes.begin(), g.nodes.end());
        for (const auto& n : g.topo_order) remaining.erase(n);
        throw Error(ErrorCode::CyclicDependency,
                    "cyclic dependency: " + describe_cycle(g, remaining));
    }
    return g;
}

// ── constraints ────────────────────────────────────────────────

std::vector<Diagnostic> check_constraints_wellformed(const Catalog& catalog) {
    std::vector<Diagnostic> out;
    auto report = [&](std::string code, std::string msg) {
        out.push_back(Diagnostic{Severity::Error, std::move(code), std::move(msg), -1});
    };
    for (const auto& rel : catalog.relations()) {
        for (const auto& col : rel.columns) {
            if (!col.check) continue;
            for_each_expr(*col.check, [&](const Expr& e) {
                if (auto* c = std::get_if<ColumnRef>(&e.node)) {
                    if (c->qualifier && !iequals(*c->qualifier, rel.name)) {
                        report("CheckScope", "CHECK on " + rel.name + "." + col.name +
                                                 " references relation '" + *c->qualifier + "'");
                    } else if (!rel.has_column(c->name)) {
                        report("CheckScope", "CHECK on " + rel.name + "." + col.name +
                                                 " references unknown column '" + c->name + "'");
                    }
                } else if (e.is<Subquery>() || e.is<Exists>() || e.is<InSubquery>()) {
                    report("CheckScope", "CHECK on " + rel.name + "." + col.name +
                                             " may not contain a subquery");
                }
            });
        }
    }
    for (const auto& c : catalog.constraints) {
        const RelationDef* rel = catalog.find(c.view);
        if (!rel) {
            report("NotEmptyTarget", "NOT EMPTY names unknown view '" + c.view + "'");
        } else if (!rel->is_query_backed()) {
            report("NotEmptyTarget", "NOT EMPTY names '" + c.view + "', which is a " +
                                         std::string(relation_kind_name(rel->kind)) +
                                         ", not a view or output");
        }
    }
    return out;
}

// ── SQL helpers ────────────────────────────────────────────────

std::string create_table_sql(const RelationDef& rel) {
    std::string sql = "CREATE TABLE " + quote_ident(rel.name) + " (";
    bool first = true;
    for (const auto& c : rel.columns) {
        sql += (first ? "" : ", ") + quote_ident(c.name) + sql_type(c.type);
        first = false;
    }
    for (const auto& c : rel.system_columns) {
        sql += (first ? "" : ", ") + c + " INTEGER";
        first = false;
    }
    return sql + ")";
}

std::string relation_query_sql(const RelationDef& rel) {
    if (!rel.query) throw Error(ErrorCode::UnknownRelation, rel.name + " has no query");
    return print_query(*rel.query, PrintMode::Sql);
}

// ── pipeline ───────────────────────────────────────────────────

CompiledProgram compile(const std::vector<Statement>& statements, const CompileOptions& options) {
    CompiledProgram out;
    Catalog& cat = out.catalog;
    cat.udfs = builtin_udfs();
    for (const auto& ext : options.externals) {
        RelationDef rel;
        rel.name = ext.name;
        rel.kind = RelationKind::Table;
        rel.columns = ext.columns;
        rel.external = true;
        rel.home_db = ext.db;
        rel.row_estimate = ext.row_estimate;
        cat.add(std::move(rel));
    }

    auto stmts = resolve_schema_copy(expand_templates(statements), cat);

    for (const auto& s : stmts) {
        RelationDef rel;
        rel.name = s.name;
        switch (s.kind) {
        case StatementKind::CreateEventTable:
        case StatementKind::CreateTable:
            rel.kind = s.kind == StatementKind::CreateEventTable ? RelationKind::EventTable
                                                                 : RelationKind::Table;
            rel.columns = std::get<std::vector<ColumnDef>>(s.body);
            check_columns_unique(rel.name, rel.columns);
            cat.add(std::move(rel));
            break;
        case StatementKind::CreateView:
        case StatementKind::CreateAsyncView:
        case StatementKind::CreateOutput:
            rel.kind = s.kind == StatementKind::CreateView        ? RelationKind::View
                       : s.kind == StatementKind::CreateAsyncView ? RelationKind::AsyncView
                                                                  : RelationKind::Output;
            rel.source_query = std::get<Query>(s.body);
            cat.add(std::move(rel));
            break;
        case StatementKind::CreateProgram: {
            const auto& body = std::get<ProgramBody>(s.body);
            cat.programs.push_back(ProgramDef{s.name, body.triggers, body.commands, {}});
            break;
        }
        case StatementKind::Constraint:
            cat.constraints.push_back(std::get<ViewConstraint>(s.body));
            break;
        default:
            throw Error(ErrorCode::InvalidProgram,
                        "statement '" + s.name + "' is not allowed at top level");
        }
    }

    // Programs: triggers and history targets.
    for (auto& p : cat.programs) {
        for (auto& t : p.triggers) {
            const RelationDef& rel = cat.at(t);
            if (!rel.is_event_like())
                throw Error(ErrorCode::InvalidProgram, "program " + p.name + " fires after '" + t +
                                                           "', which is not an event relation");
            t = rel.name;
        }
        for (auto& cmd : p.commands) {
            auto* ins = std::get_if<InsertStatement>(&cmd);
            if (!ins) continue;
            RelationDef* target = cat.find(ins->target);
            if (!target)
                throw Error(ErrorCode::UnknownRelation,
                            "program " + p.name + " inserts into unknown table '" + ins->target + "'");
            if (target->external ||
                (target->kind != RelationKind::Table && target->kind != RelationKind::HistoryTable))
                throw Error(ErrorCode::InvalidProgram,
                            "program " + p.name + " may only insert into declared tables, not " +
                                std::string(relation_kind_name(target->kind)) + " '" +
                                target->name + "'");
            target->kind = RelationKind::HistoryTable;
            ins->target = target->name;
        }
    }

    augment_system_columns(cat);
    out.graph = build_dependency_graph(cat);

    // Type check in dependency order on a scratch engine.
    Database probe;
    probe.register_udfs(0, "probe");
    for (const auto& rel : cat.relations()) {
        if (rel.is_query_backed()) continue;
        try {
            probe.exec(create_table_sql(rel));
        } catch (const Error& e) {
            rethrow_with_context(e, "table '" + rel.name + "'", ErrorCode::TypeCheckError);
        }
    }
    for (const auto& node : out.graph.topo_order) {
        RelationDef* rel = cat.find(node);
        if (!rel || !rel->is_query_backed()) continue;
        std::string context = std::string(relation_kind_name(rel->kind)) + " '" + rel->name + "'";
        try {
            rel->query = desugar_latest(expand_star_arguments(*rel->source_query, cat), cat);
            std::string sql = relation_query_sql(*rel);
            if (rel->kind == RelationKind::AsyncView) {
                rel->columns = result_columns(probe.describe(sql, context));
                probe.exec(create_table_sql(*rel), context);
            } else {
                probe.exec("CREATE VIEW " + quote_ident(rel->name) + " AS " + sql, context);
                rel->columns.clear();
                for (const auto& m : probe.table_columns(rel->name))
                    rel->columns.push_back(ColumnDef{m.name, column_type_from_decl(m.decltype_name), {}});
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EngineError) throw;
            throw Error(ErrorCode::TypeCheckError, e.what());
        }
    }
    for (auto& p : cat.programs) {
        p.desugared.clear();
        for (const auto& cmd : p.commands) {
            std::string context = "program " + p.name;
            try {
                if (auto* ins = std::get_if<InsertStatement>(&cmd)) {
                    InsertStatement d = *ins;
                    d.query = desugar_latest(expand_star_arguments(ins->query, cat), cat);
                    auto metas = probe.describe(print_query(d.query, PrintMode::Sql), context);
                    const RelationDef& target = cat.at(d.target);
                    for (const auto& c : d.columns)
                        if (!target.has_column(c) || is_system_column(c))
                            throw Error(ErrorCode::InvalidProgram,
                                        context + " inserts into unknown column '" + c + "' of " +
                                            target.name);
                    std::size_t width = d.columns.empty() ? target.columns.size() : d.columns.size();
                    if (metas.size() != width)
                        throw Error(ErrorCode::InvalidProgram,
                                    context + " inserts " + std::to_string(metas.size()) +
                                        " columns into " + target.name + ", which takes " +
                                        std::to_string(width));
                    p.desugared.emplace_back(std::move(d));
                } else {
                    Query q = desugar_latest(expand_star_arguments(std::get<Query>(cmd), cat), cat);
                    probe.describe(print_query(q, PrintMode::Sql), context);
                    p.desugared.emplace_back(std::move(q));
                }
            } catch (const Error& e) {
                if (e.code() != ErrorCode::EngineError) throw;
                throw Error(ErrorCode::TypeCheckError, e.what());
            }
        }
    }

    out.diagnostics = check_constraints_wellformed(cat);
    for (const auto& c : cat.constraints)
        if (auto* rel = cat.find(c.view); rel && rel->is_query_backed()) rel->constraints.push_back(c);
    return out;
}

// ── dump ───────────────────────────────────────────────────────

std::string dump_ir(const CompiledProgram& program) {
    std::ostringstream os;
    for (const auto& rel : program.catalog.relations()) {
        os << relation_kind_name(rel.kind) << " " << rel.name;
        if (rel.external) os << " @" << rel.home_db << " rows=" << rel.row_estimate;
        os << "\n  columns:";
        for (const auto& c : rel.columns) os << " " << c.name << ":" << column_type_name(c.type);
        if (!rel.system_columns.empty()) {
            os << "\n  system:";
            for (const auto& c : rel.system_columns) os << " " << c;
        }
        if (rel.query) os << "\n  sql: " << print_query(*rel.query, PrintMode::Sql);
        for (const auto& c : rel.constraints) os << "\n  constraint: " << c.view << " NOT EMPTY";
        os << "\n";
    }
    for (const auto& p : program.catalog.programs) {
        os << "Program " << p.name << " after";
        for (const auto& t : p.triggers) os << " " << t;
        os << "\n";
        for (const auto& cmd : p.desugared) {
            if (auto* ins = std::get_if<InsertStatement>(&cmd))
                os << "  insert " << ins->target << ": " << print_query(ins->query, PrintMode::Sql)
                   << "\n";
            else
                os << "  select: " << print_query(std::get<Query>(cmd), PrintMode::Sql) << "\n";
        }
    }
    os << "Edges\n";
    for (const auto& e : program.graph.edges) {
        const char* kind = e.kind == EdgeKind::Reads      ? "reads"
                           : e.kind == EdgeKind::Triggers ? "after"
                                                          : "staged";
        os << "  " << e.consumer << " " << kind << " " << e.dependency << "\n";
    }
    os << "Order";
    for (const auto& n : program.graph.topo_order) os << " " << n;
    os << "\n";
    for (const auto& d : program.diagnostics) os << "diagnostic " << d.code << ": " << d.message << "\n";
    return os.str();
}

}  // namespace diel
