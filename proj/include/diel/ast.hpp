// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <type_traits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "diel/error.hpp"
#include "diel/value.hpp"

namespace diel {

/// Heap box with value semantics: deep copy, deep equality.
template <typename T>
class Box {
public:
    Box() : ptr_(std::make_unique<T>()) {}
    Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
    Box(const Box& o) : ptr_(std::make_unique<T>(*o.ptr_)) {}
    Box(Box&&) noexcept = default;
    Box& operator=(const Box& o) {
        if (this != &o) ptr_ = std::make_unique<T>(*o.ptr_);
        return *this;
    }
    Box& operator=(Box&&) noexcept = default;

    T& operator*() { return *ptr_; }
    const T& operator*() const { return *ptr_; }
    T* operator->() { return ptr_.get(); }
    const T* operator->() const { return ptr_.get(); }

    bool operator==(const Box& o) const { return *ptr_ == *o.ptr_; }

private:
    std::unique_ptr<T> ptr_;
};

struct Expr;
struct Query;

// ── expressions ────────────────────────────────────────────────

struct Literal {
    Value value;
    bool operator==(const Literal&) const = default;
};

struct ColumnRef {
    std::optional<std::string> qualifier;
    std::string name;
    bool operator==(const ColumnRef&) const = default;
};

/// `*` or `q.*`. Legal as a select item or a function argument.
struct Star {
    std::optional<std::string> qualifier;
    bool operator==(const Star&) const = default;
};

enum class UnaryOp { Neg, Plus, Not };

struct Unary {
    UnaryOp op;
    Box<Expr> operand;
    bool operator==(const Unary&) const = default;
};

enum class BinaryOp {
    Or, And,
    Eq, Ne, Is, IsNot, Like, NotLike,
    Lt, Le, Gt, Ge,
    Add, Sub, Mul, Div, Mod,
    Concat,
};

struct Binary {
    BinaryOp op;
    Box<Expr> lhs;
    Box<Expr> rhs;
    bool operator==(const Binary&) const = default;
};

struct Between {
    Box<Expr> operand;
    Box<Expr> low;
    Box<Expr> high;
    bool negated = false;
    bool operator==(const Between&) const = default;
};

struct InList {
    Box<Expr> operand;
    std::vector<Expr> items;
    bool negated = false;
    bool operator==(const InList&) const;
};

struct InSubquery {
    Box<Expr> operand;
    Box<Query> query;
    bool negated = false;
    bool operator==(const InSubquery&) const = default;
};

struct FuncCall {
    std::string name;
    std::vector<Expr> args;
    bool distinct = false;
    bool operator==(const FuncCall&) const;
};

struct CaseWhen;

struct Case {
    std::optional<Box<Expr>> operand;
    std::vector<CaseWhen> whens;
    std::optional<Box<Expr>> otherwise;
    bool operator==(const Case&) const;
};

struct Subquery {
    Box<Query> query;
    bool operator==(const Subquery&) const = default;
};

struct Exists {
    Box<Query> query;
    bool operator==(const Exists&) const = default;
};

struct Expr {
    using Node = std::variant<Literal, ColumnRef, Star, Unary, Binary, Between,
                              InList, InSubquery, FuncCall, Case, Subquery, Exists>;
    Node node;

    Expr() : node(Literal{}) {}
    template <typename T>
        requires(!std::is_same_v<std::remove_cvref_t<T>, Expr>)
    Expr(T&& n) : node(std::forward<T>(n)) {}

    template <typename T> bool is() const { return std::holds_alternative<T>(node); }
    template <typename T> const T& as() const { return std::get<T>(node); }
    template <typename T> T& as() { return std::get<T>(node); }

    bool operator==(const Expr&) const = default;
};

struct CaseWhen {
    Expr when;
    Expr then;
    bool operator==(const CaseWhen&) const = default;
};

inline bool InList::operator==(const InList& o) const {
    return operand == o.operand && items == o.items && negated == o.negated;
}
inline bool FuncCall::operator==(const FuncCall& o) const {
    return name == o.name && args == o.args && distinct == o.distinct;
}
inline bool Case::operator==(const Case& o) const {
    return operand == o.operand && whens == o.whens && otherwise == o.otherwise;
}

// ── queries ────────────────────────────────────────────────────

struct TableRef {
    std::string relation;
    std::optional<std::string> alias;
    bool latest = false;
    bool latest_request = false;

    /// Name by which columns of this reference are qualified.
    const std::string& visible_name() const { return alias ? *alias : relation; }
    bool operator==(const TableRef&) const = default;
};

struct DerivedTable {
    Box<Query> query;
    std::string alias;
    bool operator==(const DerivedTable&) const = default;
};

enum class JoinKind { First, Comma, Inner, Left, Cross };

struct FromItem {
    JoinKind join = JoinKind::First;
    std::variant<TableRef, DerivedTable> source;
    std::optional<Expr> on;
    bool operator==(const FromItem&) const = default;
};

struct SelectItem {
    Expr expr;
    std::optional<std::string> alias;
    bool operator==(const SelectItem&) const = default;
};

struct OrderItem {
    Expr expr;
    bool descending = false;
    bool operator==(const OrderItem&) const = default;
};

struct Query {
    bool distinct = false;
    std::vector<SelectItem> items;
    std::vector<FromItem> from;
    std::optional<Expr> where;
    std::vector<Expr> group_by;
    std::optional<Expr> having;
    std::vector<OrderItem> order_by;
    std::optional<Expr> limit;
    std::optional<Expr> offset;
    bool operator==(const Query&) const = default;
};

// ── statements ─────────────────────────────────────────────────

enum class ColumnType { Int, Real, Text, Any };

struct ColumnDef {
    std::string name;
    ColumnType type = ColumnType::Any;
    std::optional<Expr> check;
    bool operator==(const ColumnDef&) const = default;
};

struct SchemaCopy {
    std::string source;
    bool operator==(const SchemaCopy&) const = default;
};

/// Lexical token kept verbatim inside a template body.
struct RawToken {
    enum class Kind { Word, QuotedWord, Number, String, Symbol } kind;
    std::string text;
    bool operator==(const RawToken&) const = default;
};

struct TemplateDef {
    std::vector<std::string> params;
    std::vector<RawToken> body;
    bool operator==(const TemplateDef&) const = default;
};

struct TemplateUse {
    std::string template_name;
    std::vector<std::pair<std::string, std::string>> bindings;
    bool operator==(const TemplateUse&) const = default;
};

struct InsertStatement {
    std::string target;
    std::vector<std::string> columns;
    Query query;
    bool operator==(const InsertStatement&) const = default;
};

using ProgramCommand = std::variant<InsertStatement, Query>;

struct ProgramBody {
    std::vector<std::string> triggers;
    std::vector<ProgramCommand> commands;
    bool operator==(const ProgramBody&) const = default;
};

enum class ConstraintKind { NotEmpty };

struct ViewConstraint {
    std::string view;
    ConstraintKind kind = ConstraintKind::NotEmpty;
    bool operator==(const ViewConstraint&) const = default;
};

enum class StatementKind {
    CreateEventTable,
    CreateTable,
    CreateTableAsSchemaCopy,
    CreateView,
    CreateAsyncView,
    CreateOutput,
    CreateTemplate,
    CreateProgram,
    InsertStatement,
    Constraint,
};

using StatementBody = std::variant<std::monostate, std::vector<ColumnDef>, SchemaCopy, Query,
                                   TemplateDef, TemplateUse, ProgramBody, InsertStatement,
                                   ViewConstraint>;

struct Statement {
    StatementKind kind = StatementKind::CreateTable;
    std::string name;
    StatementBody body;
    SourceSpan span;
    /// Set for `CREATE EVENT TABLE x AS y`; schema copy into an event table.
    bool copy_into_event_table = false;

    /// Structural equality; source spans are ignored.
    bool operator==(const Statement& o) const {
        return kind == o.kind && name == o.name && body == o.body &&
               copy_into_event_table == o.copy_into_event_table;
    }
};

std::string_view statement_kind_name(StatementKind kind);
std::string_view column_type_name(ColumnType type);

// ── traversal helpers ──────────────────────────────────────────

/// Calls `fn` for every Query reachable from `q`, including `q`, in pre-order.
template <typename Fn>
void for_each_query(const Query& q, Fn&& fn);
template <typename Fn>
void for_each_query(Query& q, Fn&& fn);

/// Calls `fn` for every TableRef in `q` and its nested queries.
template <typename Fn>
void for_each_table_ref(const Query& q, Fn&& fn);

/// Calls `fn` for every expression node in `e`, pre-order. Does not descend into
/// nested queries.
template <typename Fn>
void for_each_expr(const Expr& e, Fn&& fn);
template <typename Fn>
void for_each_expr(Expr& e, Fn&& fn);

/// Calls `fn` for every top-level expression directly owned by `q`
/// (items, on, where, group by, having, order by, limit, offset).
template <typename Q, typename Fn>
void for_each_clause_expr(Q& q, Fn&& fn);

}  // namespace diel

#include "diel/ast_walk.hpp"
