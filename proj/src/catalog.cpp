// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/catalog.hpp"

#include <algorithm>
#include <set>

#include "diel/lexer.hpp"

namespace diel {

std::string_view relation_kind_name(RelationKind kind) {
    switch (kind) {
    case RelationKind::EventTable: return "EventTable";
    case RelationKind::Table: return "Table";
    case RelationKind::HistoryTable: return "HistoryTable";
    case RelationKind::View: return "View";
    case RelationKind::AsyncView: return "AsyncView";
    case RelationKind::Output: return "Output";
    }
    return "?";
}

bool is_system_column(std::string_view name) {
    return iequals(name, kTimestep) || iequals(name, kTimestamp) || iequals(name, kRequestTimestep);
}

bool RelationDef::has_column(std::string_view col) const {
    for (const auto& c : columns)
        if (iequals(c.name, col)) return true;
    for (const auto& c : system_columns)
        if (iequals(c, col)) return true;
    return false;
}

std::vector<std::string> RelationDef::user_column_names() const {
    std::vector<std::string> out;
    for (const auto& c : columns) out.push_back(c.name);
    return out;
}

std::vector<std::string> RelationDef::all_column_names() const {
    auto out = user_column_names();
    out.insert(out.end(), system_columns.begin(), system_columns.end());
    return out;
}

const RelationDef* Catalog::find(std::string_view name) const {
    auto it = index_.find(to_lower(name));
    return it == index_.end() ? nullptr : &relations_[it->second];
}

RelationDef* Catalog::find(std::string_view name) {
    auto it = index_.find(to_lower(name));
    return it == index_.end() ? nullptr : &relations_[it->second];
}

const RelationDef& Catalog::at(std::string_view name) const {
    if (auto* r = find(name)) return *r;
    throw Error(ErrorCode::UnknownRelation, "unknown relation '" + std::string(name) + "'");
}

RelationDef& Catalog::at(std::string_view name) {
    if (auto* r = find(name)) return *r;
    throw Error(ErrorCode::UnknownRelation, "unknown relation '" + std::string(name) + "'");
}

void Catalog::add(RelationDef rel) {
    std::string key = to_lower(rel.name);
    if (index_.count(key))
        throw Error(ErrorCode::DuplicateRelation, "relation '" + rel.name + "' is defined twice");
    index_[key] = relations_.size();
    relations_.push_back(std::move(rel));
}

void Catalog::remove(std::string_view name) {
    std::string key = to_lower(name);
    relations_.erase(std::remove_if(relations_.begin(), relations_.end(),
                                    [&](const RelationDef& r) { return to_lower(r.name) == key; }),
                     relations_.end());
    reindex();
}

void Catalog::reindex() {
    index_.clear();
    for (std::size_t i = 0; i < relations_.size(); ++i) index_[to_lower(relations_[i].name)] = i;
}

// ── graph ──────────────────────────────────────────────────────

std::string program_node(std::string_view program_name) {
    return "program:" + std::string(program_name);
}

std::vector<std::string> DependencyGraph::dependencies(std::string_view node) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.kind != EdgeKind::StagedWrite && e.consumer == node &&
            std::find(out.begin(), out.end(), e.dependency) == out.end())
            out.push_back(e.dependency);
    return out;
}

std::vector<std::string> DependencyGraph::consumers(std::string_view node) const {
    std::vector<std::string> out;
    for (const auto& e : edges)
        if (e.kind != EdgeKind::StagedWrite && e.dependency == node &&
            std::find(out.begin(), out.end(), e.consumer) == out.end())
            out.push_back(e.consumer);
    return out;
}

std::vector<std::string> DependencyGraph::closure(std::string_view node) const {
    std::vector<std::string> out;
    std::set<std::string> seen{std::string(node)};
    std::vector<std::string> stack{std::string(node)};
    while (!stack.empty()) {
        std::string cur = stack.back();
        stack.pop_back();
        for (const auto& d : dependencies(cur)) {
            if (seen.insert(d).second) {
                out.push_back(d);
                stack.push_back(d);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool DependencyGraph::has_edge(std::string_view consumer, std::string_view dependency,
                               EdgeKind kind) const {
    return std::any_of(edges.begin(), edges.end(), [&](const Edge& e) {
        return e.consumer == consumer && e.dependency == dependency && e.kind == kind;
    });
}

}  // namespace diel
