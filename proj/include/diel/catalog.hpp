// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "diel/ast.hpp"
#include "diel/sqlite.hpp"

namespace diel {

enum class RelationKind { EventTable, Table, HistoryTable, View, AsyncView, Output };

std::string_view relation_kind_name(RelationKind kind);

inline constexpr std::string_view kTimestep = "timestep";
inline constexpr std::string_view kTimestamp = "timestamp";
inline constexpr std::string_view kRequestTimestep = "request_timestep";

bool is_system_column(std::string_view name);

struct RelationDef {
    std::string name;
    RelationKind kind = RelationKind::Table;
    std::vector<ColumnDef> columns;  // user columns
    std::vector<std::string> system_columns;
    /// Query as written after template expansion; LATEST flags intact.
    std::optional<Query> source_query;
    /// Desugared query: no LATEST flags, `q.*` arguments expanded.
    std::optional<Query> query;
    std::vector<ViewConstraint> constraints;

    /// Base relation found in a database rather than declared.
    bool external = false;
    std::string home_db;
    std::int64_t row_estimate = 0;
    /// Stored as a table and refreshed when a dependency changes.
    bool materialized = false;

    /// True for relations that receive rows with a `timestep`.
    bool is_event_like() const {
        return kind == RelationKind::EventTable || kind == RelationKind::AsyncView;
    }
    bool is_query_backed() const {
        return kind == RelationKind::View || kind == RelationKind::AsyncView ||
               kind == RelationKind::Output;
    }
    bool has_column(std::string_view col) const;
    std::vector<std::string> user_column_names() const;
    std::vector<std::string> all_column_names() const;
};

struct ProgramDef {
    std::string name;
    std::vector<std::string> triggers;
    std::vector<ProgramCommand> commands;         // as written
    std::vector<ProgramCommand> desugared;        // LATEST expanded
};

/// A base relation discovered in a loaded database.
struct ExternalRelation {
    std::string name;
    std::vector<ColumnDef> columns;
    std::string db;
    std::int64_t row_estimate = 0;
};

/// Relations, programs and UDFs. Lookups are case-insensitive.
class Catalog {
public:
    const RelationDef* find(std::string_view name) const;
    RelationDef* find(std::string_view name);
    /// Throws UnknownRelation.
    const RelationDef& at(std::string_view name) const;
    RelationDef& at(std::string_view name);
    /// Throws DuplicateRelation.
    void add(RelationDef rel);
    void remove(std::string_view name);

    const std::vector<RelationDef>& relations() const { return relations_; }
    std::vector<RelationDef>& relations() { return relations_; }

    std::vector<ProgramDef> programs;
    std::vector<UdfInfo> udfs;
    std::vector<ViewConstraint> constraints;

private:
    void reindex();
    std::vector<RelationDef> relations_;
    std::map<std::string, std::size_t> index_;
};

// ── dependency graph ───────────────────────────────────────────

enum class EdgeKind {
    Reads,        // a query reads a relation
    Triggers,     // a program fires after an event relation
    StagedWrite,  // a program appends to a history table at the end of a timestep
};

/// `consumer` depends on `dependency`.
struct Edge {
    std::string consumer;
    std::string dependency;
    EdgeKind kind = EdgeKind::Reads;
    bool operator==(const Edge&) const = default;
};

std::string program_node(std::string_view program_name);

class DependencyGraph {
public:
    std::vector<std::string> nodes;
    std::vector<Edge> edges;
    /// Dependencies before consumers; staged writes are ignored.
    std::vector<std::string> topo_order;

    /// Direct dependencies over Reads/Triggers edges.
    std::vector<std::string> dependencies(std::string_view node) const;
    /// Direct consumers over Reads/Triggers edges.
    std::vector<std::string> consumers(std::string_view node) const;
    /// All transitive dependencies over Reads/Triggers edges, excluding `node`.
    std::vector<std::string> closure(std::string_view node) const;
    bool has_edge(std::string_view consumer, std::string_view dependency,
                  EdgeKind kind = EdgeKind::Reads) const;
};

}  // namespace diel
