// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/sqlite.hpp"

#include <sqlite3.h>

#include <random>

#include "diel/error.hpp"
#include "diel/hash.hpp"

namespace diel {

namespace {

[[noreturn]] void engine_fail(sqlite3* db, std::string_view context) {
    std::string msg = sqlite3_errmsg(db);
    ErrorCode code = msg.rfind("no such function", 0) == 0 ? ErrorCode::UnknownFunction
                                                            : ErrorCode::EngineError;
    if (!context.empty()) msg = std::string(context) + ": " + msg;
    throw Error(code, msg);
}

class Stmt {
public:
    Stmt(sqlite3* db, std::string_view sql, std::string_view context) : db_(db) {
        const char* tail = nullptr;
        if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, &tail) !=
            SQLITE_OK)
            engine_fail(db, context);
        if (!stmt_) throw Error(ErrorCode::EngineError, std::string(context) + ": empty statement");
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    void bind(int idx, const Value& v) {
        int rc = std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, std::monostate>) return sqlite3_bind_null(stmt_, idx);
                else if constexpr (std::is_same_v<T, std::int64_t>)
                    return sqlite3_bind_int64(stmt_, idx, x);
                else if constexpr (std::is_same_v<T, double>)
                    return sqlite3_bind_double(stmt_, idx, x);
                else
                    return sqlite3_bind_text(stmt_, idx, x.data(), static_cast<int>(x.size()),
                                             SQLITE_TRANSIENT);
            },
            v);
        if (rc != SQLITE_OK) engine_fail(db_, "bind");
    }

    sqlite3_stmt* get() const { return stmt_; }

private:
    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

Value column_value(sqlite3_stmt* stmt, int i) {
    switch (sqlite3_column_type(stmt, i)) {
    case SQLITE_INTEGER: return static_cast<std::int64_t>(sqlite3_column_int64(stmt, i));
    case SQLITE_FLOAT: return sqlite3_column_double(stmt, i);
    case SQLITE_NULL: return std::monostate{};
    default: {
        auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt, i));
        return std::string(text, static_cast<std::size_t>(sqlite3_column_bytes(stmt, i)));
    }
    }
}

std::string quote_name(std::string_view name) {
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

// ── UDFs ───────────────────────────────────────────────────────

bool any_null(int argc, sqlite3_value** argv) {
    for (int i = 0; i < argc; ++i)
        if (sqlite3_value_type(argv[i]) == SQLITE_NULL) return true;
    return false;
}

void point_in_box(sqlite3_context* ctx, int argc, sqlite3_value** argv) {
    if (any_null(argc, argv)) return sqlite3_result_null(ctx);
    double lat = sqlite3_value_double(argv[0]), lon = sqlite3_value_double(argv[1]);
    double lat_min = sqlite3_value_double(argv[2]), lon_min = sqlite3_value_double(argv[3]);
    double lat_max = sqlite3_value_double(argv[4]), lon_max = sqlite3_value_double(argv[5]);
    bool in = lat_min <= lat && lat <= lat_max && lon_min <= lon && lon <= lon_max;
    sqlite3_result_int(ctx, in ? 1 : 0);
}

void box_in_box(sqlite3_context* ctx, int argc, sqlite3_value** argv) {
    if (any_null(argc, argv)) return sqlite3_result_null(ctx);
    double v[8];
    for (int i = 0; i < 8; ++i) v[i] = sqlite3_value_double(argv[i]);
    // inner (latMin, lonMin, latMax, lonMax) inside outer (same layout)
    bool in = v[4] <= v[0] && v[2] <= v[6] && v[5] <= v[1] && v[3] <= v[7];
    sqlite3_result_int(ctx, in ? 1 : 0);
}

}  // namespace

struct Database::RandomState {
    std::mt19937_64 rng;
};

namespace {

void seeded_random(sqlite3_context* ctx, int, sqlite3_value**) {
    auto* state = static_cast<std::mt19937_64*>(sqlite3_user_data(ctx));
    sqlite3_result_int64(ctx, static_cast<sqlite3_int64>((*state)()));
}

}  // namespace

const std::vector<UdfInfo>& builtin_udfs() {
    static const std::vector<UdfInfo> kUdfs = {
        {"point_in_box", 6, true},
        {"is_within_box", 6, true},
        {"box_in_box", 8, true},
        {"random", 0, false},
    };
    return kUdfs;
}

Database::Database() {
    if (sqlite3_open_v2(":memory:", &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
        SQLITE_OK) {
        std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
        sqlite3_close(db_);
        throw Error(ErrorCode::EngineError, "cannot open in-memory database: " + msg);
    }
}

Database::~Database() {
    if (db_) sqlite3_close(db_);
    delete random_;
}

Database::Database(Database&& o) noexcept : db_(o.db_), random_(o.random_) {
    o.db_ = nullptr;
    o.random_ = nullptr;
}

Database& Database::operator=(Database&& o) noexcept {
    if (this != &o) {
        if (db_) sqlite3_close(db_);
        delete random_;
        db_ = o.db_;
        random_ = o.random_;
        o.db_ = nullptr;
        o.random_ = nullptr;
    }
    return *this;
}

void Database::exec(std::string_view sql, std::string_view context) {
    std::string text(sql);
    char* err = nullptr;
    if (sqlite3_exec(db_, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        ErrorCode code = msg.rfind("no such function", 0) == 0 ? ErrorCode::UnknownFunction
                                                                : ErrorCode::EngineError;
        if (!context.empty()) msg = std::string(context) + ": " + msg;
        throw Error(code, msg);
    }
}

ResultSet Database::query(std::string_view sql, const std::vector<Value>& params,
                          std::string_view context) {
    Stmt stmt(db_, sql, context);
    for (std::size_t i = 0; i < params.size(); ++i) stmt.bind(static_cast<int>(i + 1), params[i]);
    ResultSet rs;
    int n = sqlite3_column_count(stmt.get());
    for (int i = 0; i < n; ++i) rs.columns.emplace_back(sqlite3_column_name(stmt.get(), i));
    for (;;) {
        int rc = sqlite3_step(stmt.get());
        if (rc == SQLITE_DONE) break;
        if (rc != SQLITE_ROW) engine_fail(db_, context);
        Row row;
        row.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) row.push_back(column_value(stmt.get(), i));
        rs.rows.push_back(std::move(row));
    }
    return rs;
}

std::vector<ColumnMeta> Database::describe(std::string_view sql, std::string_view context) {
    Stmt stmt(db_, sql, context);
    std::vector<ColumnMeta> out;
    int n = sqlite3_column_count(stmt.get());
    for (int i = 0; i < n; ++i) {
        const char* decl = sqlite3_column_decltype(stmt.get(), i);
        out.push_back({sqlite3_column_name(stmt.get(), i), decl ? decl : ""});
    }
    return out;
}

void Database::insert_rows(std::string_view table, const std::vector<std::string>& columns,
                           const std::vector<Row>& rows) {
    if (rows.empty()) return;
    std::string sql = "INSERT INTO " + quote_name(table);
    if (!columns.empty()) {
        sql += " (";
        for (std::size_t i = 0; i < columns.size(); ++i) sql += (i ? ", " : "") + quote_name(columns[i]);
        sql += ")";
    }
    std::size_t width = columns.empty() ? rows.front().size() : columns.size();
    sql += " VALUES (";
    for (std::size_t i = 0; i < width; ++i) sql += i ? ", ?" : "?";
    sql += ")";
    exec("SAVEPOINT diel_insert");
    try {
        Stmt stmt(db_, sql, table);
        for (const auto& row : rows) {
            if (row.size() != width)
                throw Error(ErrorCode::SchemaMismatch,
                            "row width " + std::to_string(row.size()) + " does not match " +
                                std::to_string(width) + " columns of " + std::string(table));
            sqlite3_reset(stmt.get());
            for (std::size_t i = 0; i < width; ++i) stmt.bind(static_cast<int>(i + 1), row[i]);
            if (sqlite3_step(stmt.get()) != SQLITE_DONE) engine_fail(db_, table);
        }
    } catch (...) {
        exec("ROLLBACK TO diel_insert; RELEASE diel_insert");
        throw;
    }
    exec("RELEASE diel_insert");
}

std::vector<ColumnMeta> Database::table_columns(std::string_view table) {
    auto rs = query("SELECT name, type FROM pragma_table_info(?)", {std::string(table)});
    std::vector<ColumnMeta> out;
    for (const auto& r : rs.rows)
        out.push_back({std::get<std::string>(r[0]),
                       is_null(r[1]) ? std::string() : std::get<std::string>(r[1])});
    return out;
}

std::vector<std::string> Database::relation_names() {
    auto rs = query(
        "SELECT name FROM sqlite_master WHERE type IN ('table', 'view') "
        "AND name NOT LIKE 'sqlite_%' ORDER BY name");
    std::vector<std::string> out;
    for (const auto& r : rs.rows) out.push_back(std::get<std::string>(r[0]));
    return out;
}

void Database::load_file(const std::string& path) {
    sqlite3* src = nullptr;
    if (sqlite3_open_v2(path.c_str(), &src, SQLITE_OPEN_READONLY, nullptr) != SQLITE_OK) {
        std::string msg = src ? sqlite3_errmsg(src) : "cannot open";
        sqlite3_close(src);
        throw Error(ErrorCode::ConfigError, path + ": " + msg);
    }
    sqlite3_backup* b = sqlite3_backup_init(db_, "main", src, "main");
    int rc = b ? sqlite3_backup_step(b, -1) : SQLITE_ERROR;
    sqlite3_backup_finish(b);
    std::string msg = sqlite3_errmsg(db_);
    sqlite3_close(src);
    if (rc != SQLITE_DONE) throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

void Database::save_file(const std::string& path) {
    sqlite3* dst = nullptr;
    if (sqlite3_open_v2(path.c_str(), &dst, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE,
                        nullptr) != SQLITE_OK) {
        std::string msg = dst ? sqlite3_errmsg(dst) : "cannot open";
        sqlite3_close(dst);
        throw Error(ErrorCode::ConfigError, path + ": " + msg);
    }
    sqlite3_backup* b = sqlite3_backup_init(dst, "main", db_, "main");
    int rc = b ? sqlite3_backup_step(b, -1) : SQLITE_ERROR;
    sqlite3_backup_finish(b);
    std::string msg = sqlite3_errmsg(dst);
    sqlite3_close(dst);
    if (rc != SQLITE_DONE) throw Error(ErrorCode::ConfigError, path + ": " + msg);
}

void Database::register_udfs(std::uint64_t seed, std::string_view salt) {
    if (!random_) random_ = new RandomState;
    random_->rng.seed(seed ^ fnv1a64(salt));

    const int pure = SQLITE_UTF8 | SQLITE_DETERMINISTIC;
    auto reg = [&](const char* name, int arity, int flags, void* data,
                   void (*fn)(sqlite3_context*, int, sqlite3_value**)) {
        if (sqlite3_create_function_v2(db_, name, arity, flags, data, fn, nullptr, nullptr,
                                       nullptr) != SQLITE_OK)
            engine_fail(db_, name);
    };
    reg("point_in_box", 6, pure, nullptr, point_in_box);
    reg("is_within_box", 6, pure, nullptr, point_in_box);
    reg("box_in_box", 8, pure, nullptr, box_in_box);
    reg("random", 0, SQLITE_UTF8, &random_->rng, seeded_random);
}

}  // namespace diel
