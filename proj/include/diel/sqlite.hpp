// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "diel/value.hpp"

struct sqlite3;
struct sqlite3_stmt;

namespace diel {

struct ResultSet {
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

/// Declared column of a prepared statement or table.
struct ColumnMeta {
    std::string name;
    std::string decltype_name;  // empty when the engine reports none
};

/// Owning handle to one in-memory embedded engine connection.
class Database {
public:
    Database();
    ~Database();
    Database(const Database&) = delete;
    Database& operator=(const Database&) = delete;
    Database(Database&& o) noexcept;
    Database& operator=(Database&& o) noexcept;

    /// Runs one or more statements; throws EngineError with `context` prefixed.
    void exec(std::string_view sql, std::string_view context = {});

    /// Runs a single query with optional positional parameters.
    ResultSet query(std::string_view sql, const std::vector<Value>& params = {},
                    std::string_view context = {});

    /// Prepares `sql` without running it and reports its result columns.
    std::vector<ColumnMeta> describe(std::string_view sql, std::string_view context = {});

    /// Inserts rows with a single prepared statement inside a transaction.
    void insert_rows(std::string_view table, const std::vector<std::string>& columns,
                     const std::vector<Row>& rows);

    /// Column metadata of an existing table or view.
    std::vector<ColumnMeta> table_columns(std::string_view table);

    /// Names of user tables and views (no sqlite_ internals).
    std::vector<std::string> relation_names();

    /// Copies the contents of a database file into this connection.
    void load_file(const std::string& path);

    /// Writes this connection's contents to a database file.
    void save_file(const std::string& path);

    /// Registers the built-in UDFs. RANDOM() is replaced by a generator
    /// seeded from (seed, salt) so runs are replayable.
    void register_udfs(std::uint64_t seed, std::string_view salt);

    sqlite3* handle() const { return db_; }

private:
    sqlite3* db_ = nullptr;
    struct RandomState;
    RandomState* random_ = nullptr;
};

/// Built-in UDF names with their arities.
struct UdfInfo {
    std::string name;
    int arity;  // -1 for variadic
    bool pure;
};
const std::vector<UdfInfo>& builtin_udfs();

}  // namespace diel
