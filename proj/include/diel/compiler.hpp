// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "diel/catalog.hpp"

namespace diel {

struct CompileOptions {
    std::vector<ExternalRelation> externals;
};

struct CompiledProgram {
    Catalog catalog;
    DependencyGraph graph;
    std::vector<Diagnostic> diagnostics;
};

/// Full pipeline: templates, schema copy, kinds, system columns, name
/// resolution, dependency graph, LATEST desugaring and type checking against
/// an in-memory probe engine.
CompiledProgram compile(const std::vector<Statement>& statements, const CompileOptions& options = {});

/// Replaces every `USE TEMPLATE` body with the substituted, re-parsed
/// template and drops template definitions.
std::vector<Statement> expand_templates(const std::vector<Statement>& statements);

/// Turns schema-copy statements into plain column lists. `catalog` supplies
/// relations that exist before the program (database tables).
std::vector<Statement> resolve_schema_copy(const std::vector<Statement>& statements,
                                           const Catalog& catalog);

/// Rewrites LATEST / LATEST_REQUEST references into MAX-subquery conjuncts.
Query desugar_latest(const Query& query, const Catalog& catalog);

/// Replaces `q.*` function arguments with q's user columns.
Query expand_star_arguments(const Query& query, const Catalog& catalog);

/// Assigns system columns per relation kind. Idempotent.
void augment_system_columns(Catalog& catalog);

DependencyGraph build_dependency_graph(const Catalog& catalog);

std::vector<Diagnostic> check_constraints_wellformed(const Catalog& catalog);

/// Engine DDL for a stored relation: user columns then system columns.
std::string create_table_sql(const RelationDef& rel);

/// Engine SQL for a query-backed relation's desugared query.
std::string relation_query_sql(const RelationDef& rel);

/// Column names of an async view's result relation given its query's
/// column names: duplicates and system names get a trailing underscore.
std::vector<std::string> async_result_names(const std::vector<std::string>& names);

/// Column type for an engine-declared type name (INT, VARCHAR, ...).
ColumnType column_type_from_decl(std::string_view decl);

/// Statements that recompile to `catalog` (database tables excluded).
std::vector<Statement> catalog_statements(const Catalog& catalog);

/// The database tables of `catalog`, in the form `compile` accepts.
std::vector<ExternalRelation> catalog_externals(const Catalog& catalog);

/// Human-readable dump of the compiled catalog and graph.
std::string dump_ir(const CompiledProgram& program);

}  // namespace diel
