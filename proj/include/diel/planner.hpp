// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "diel/compiler.hpp"
#include "diel/latency.hpp"

namespace diel {

enum class DbKind { InProcess, Worker, Remote };

std::string_view db_kind_name(DbKind kind);

struct DbDescriptor {
    std::string id;
    DbKind kind = DbKind::InProcess;
    /// Base relations with row-count estimates; `db` of each equals `id`.
    std::vector<ExternalRelation> relations;
    /// Delay applied to messages this instance sends back.
    LatencySpec latency;
};

/// Reads the base relations of an engine and their row counts.
DbDescriptor describe_database(std::string id, DbKind kind, Database& db, LatencySpec latency = {});

using Placement = std::map<std::string, std::string>;
using Estimates = std::map<std::string, std::int64_t>;

/// SQL one instance runs. `base_ddl` recreates resident base relations on a
/// fresh engine; setup skips it because those relations already hold data.
struct DbProgram {
    std::vector<std::string> base_ddl;
    std::vector<std::string> setup;
    /// Async view name to the query the instance evaluates for it.
    std::map<std::string, std::string> named_queries;
};

/// A base relation copied once at setup to an instance that reads it.
struct Snapshot {
    std::string relation;
    std::string from;
    std::string to;
};

struct FederationPlan {
    std::string coordinator;
    std::vector<DbDescriptor> dbs;
    /// Catalog after output rewriting, recompiled.
    CompiledProgram program;
    Placement placement;
    /// Async view to the instance that evaluates it.
    std::map<std::string, std::string> leaders;
    /// Event table to the instances holding a shadow copy.
    std::map<std::string, std::set<std::string>> shipments;
    std::vector<Snapshot> snapshots;
    /// Rewritten output to the async view carrying its original query.
    std::map<std::string, std::string> rewritten_outputs;
    /// Async view to the event tables its query reads (sorted).
    std::map<std::string, std::vector<std::string>> event_deps;
    std::map<std::string, DbProgram> programs;

    const DbDescriptor& db(std::string_view id) const;
};

/// Places every relation: event, history, declared tables, async result
/// relations and outputs at the coordinator; base tables at their home;
/// views at the leader of their query. Throws UnknownRelation or
/// DuplicateRelation for inconsistent descriptors.
Placement locate_relations(const Catalog& catalog, const std::vector<DbDescriptor>& dbs);

/// Stored relations (anything but views and outputs) a query needs,
/// following views and outputs transitively. Sorted.
std::vector<std::string> stored_inputs(const Query& query, const Catalog& catalog);

/// Sum of estimated rows among `inputs` not already at `db`.
std::int64_t shipping_cost(const std::vector<std::string>& inputs, const Placement& placement,
                           const Estimates& estimates, const std::string& db);

/// The instance minimizing shipping cost; ties go to the coordinator, then
/// to the lexicographically smallest id.
std::string choose_leader(const std::vector<std::string>& inputs, const Placement& placement,
                          const Estimates& estimates, const std::vector<DbDescriptor>& dbs);

/// Row estimates used for leader choice: base tables use their descriptor
/// counts, everything stored at the coordinator counts as max(1, rows).
Estimates planning_estimates(const Catalog& catalog);

struct OutputRewrite {
    RelationDef async_view;
    RelationDef coordinator_output;
};

/// Splits an output that reads remote data into an async view holding the
/// original query and a coordinator output applying the default policy.
/// `event_tables` are the event tables the original query reads.
OutputRewrite rewrite_remote_output(const RelationDef& output, const Catalog& catalog,
                                    const std::vector<std::string>& event_tables);

FederationPlan plan_federation(const CompiledProgram& program, const std::vector<DbDescriptor>& dbs);

/// Refills `plan.programs` from the plan's catalog and placement.
void emit_per_db_sql(FederationPlan& plan);

/// Program text of one instance: base DDL, setup statements, named queries.
std::string per_db_sql_text(const FederationPlan& plan, const std::string& db);

std::string dump_plan(const FederationPlan& plan);

}  // namespace diel
