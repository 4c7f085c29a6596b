// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/optimizer.hpp"

#include <algorithm>

#include "diel/hash.hpp"
#include "diel/lexer.hpp"

namespace diel {

namespace {

/// Queries of `root` and every view or output it reads, as written.
std::vector<const Query*> source_closure(const RelationDef& root, const Catalog& catalog) {
    std::vector<const Query*> out;
    std::set<std::string> seen{root.name};
    auto visit = [&](auto&& self, const RelationDef& rel) -> void {
        const Query& q = rel.source_query ? *rel.source_query : *rel.query;
        out.push_back(&q);
        for_each_table_ref(q, [&](const TableRef& t) {
            const RelationDef& dep = catalog.at(t.relation);
            if (dep.kind != RelationKind::View && dep.kind != RelationKind::Output) return;
            if (seen.insert(dep.name).second) self(self, dep);
        });
    };
    visit(visit, root);
    return out;
}

bool calls_random(const Query& q) {
    bool found = false;
    for_each_query(q, [&](const Query& sub) {
        for_each_clause_expr(sub, [&](const Expr& e) {
            for_each_expr(e, [&](const Expr& node) {
                if (auto* f = std::get_if<FuncCall>(&node.node); f && iequals(f->name, "random")) found = true;
            });
        });
    });
    return found;
}

}  // namespace

MaterializationResult materialize_shared_views(const Catalog& catalog, const DependencyGraph& graph,
                                               const std::set<std::string>* eligible) {
    MaterializationResult out{catalog, {}};
    for (const auto& node : graph.topo_order) {
        RelationDef* rel = out.catalog.find(node);
        if (!rel || rel->kind != RelationKind::View) continue;
        if (eligible && !eligible->count(rel->name)) continue;
        if (graph.consumers(rel->name).size() < 2) continue;
        auto queries = source_closure(*rel, catalog);
        if (std::any_of(queries.begin(), queries.end(), [](const Query* q) { return calls_random(*q); }))
            continue;
        rel->materialized = true;
        out.plan.views.push_back(rel->name);
        auto& deps = out.plan.refresh_deps[rel->name];
        for (const auto& d : graph.closure(rel->name)) {
            const RelationDef* dep = catalog.find(d);
            if (dep && (!dep->is_query_backed() || dep->kind == RelationKind::AsyncView)) deps.push_back(d);
        }
    }
    return out;
}

MaterializationPlan apply_materialization(FederationPlan& plan) {
    std::set<std::string> eligible;
    for (const auto& rel : plan.program.catalog.relations())
        if (rel.kind == RelationKind::View && plan.placement.count(rel.name) &&
            plan.placement.at(rel.name) == plan.coordinator)
            eligible.insert(rel.name);
    auto result = materialize_shared_views(plan.program.catalog, plan.program.graph, &eligible);
    plan.program.catalog = std::move(result.catalog);
    emit_per_db_sql(plan);
    return result.plan;
}

bool is_cacheable(const std::string& view, const Catalog& catalog) {
    const RelationDef* rel = catalog.find(view);
    if (!rel || rel->kind != RelationKind::AsyncView) return false;
    bool has_event = false;
    for (const Query* q : source_closure(*rel, catalog)) {
        if (calls_random(*q)) return false;
        bool ok = true;
        for_each_query(*q, [&](const Query& sub) {
            bool reads_event = false;
            for (const auto& f : sub.from) {
                auto* t = std::get_if<TableRef>(&f.source);
                if (!t) continue;
                const RelationDef& dep = catalog.at(t->relation);
                if (dep.kind == RelationKind::HistoryTable || dep.kind == RelationKind::AsyncView) ok = false;
                if (dep.kind == RelationKind::EventTable) {
                    has_event = reads_event = true;
                    if (!t->latest) ok = false;
                }
            }
            if (reads_event)
                for (const auto& item : sub.items)
                    if (item.expr.is<Star>()) ok = false;
            for_each_clause_expr(sub, [&](const Expr& e) {
                for_each_expr(e, [&](const Expr& node) {
                    if (auto* c = std::get_if<ColumnRef>(&node.node); c && is_system_column(c->name)) ok = false;
                });
            });
        });
        if (!ok) return false;
    }
    return has_event;
}

// ── request cache ──────────────────────────────────────────────

std::string RequestCache::key(const std::string& view, const nlohmann::json& params) {
    return hex64(fnv1a64(view + "\n" + params.dump()));
}

std::optional<std::int64_t> RequestCache::lookup(const std::string& view, const nlohmann::json& params) {
    auto it = by_hash_.find(key(view, params));
    if (it == by_hash_.end()) {
        ++misses_;
        return std::nullopt;
    }
    ++hits_;
    return entries_[it->second].data_id;
}

std::int64_t RequestCache::store(const std::string& view, const nlohmann::json& params,
                                 const std::vector<Row>& rows) {
    std::string hash = key(view, params);
    std::uint64_t digest = fnv1a64(rows_to_json(rows).dump());
    std::int64_t data_id = 0;
    auto [lo, hi] = by_digest_.equal_range(digest);
    for (auto it = lo; it != hi; ++it)
        if (data_.at(it->second) == rows) data_id = it->second;
    if (!data_id) {
        data_id = static_cast<std::int64_t>(data_.size()) + 1;
        data_[data_id] = rows;
        by_digest_.emplace(digest, data_id);
    }
    if (auto it = by_hash_.find(hash); it != by_hash_.end()) {
        entries_[it->second].data_id = data_id;
    } else {
        by_hash_[hash] = entries_.size();
        entries_.push_back(RequestCacheRow{hash, data_id, view});
    }
    return data_id;
}

const std::vector<Row>& RequestCache::rows(std::int64_t data_id) const {
    auto it = data_.find(data_id);
    if (it == data_.end()) throw Error(ErrorCode::EngineError, "no cached rows for data id " + std::to_string(data_id));
    return it->second;
}

}  // namespace diel
