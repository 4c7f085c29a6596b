// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Traversal templates for the AST. Included from ast.hpp.

namespace diel::detail {

template <typename T, typename U>
using like_const_t = std::conditional_t<std::is_const_v<T>, const U, U>;

/// Invokes `on_expr` for direct child expressions of `e` and `on_query` for
/// queries nested directly inside `e`.
template <typename E, typename OnExpr, typename OnQuery>
void expr_children(E& e, OnExpr&& on_expr, OnQuery&& on_query) {
    using X = like_const_t<E, Expr>;
    using Q = like_const_t<E, Query>;
    std::visit(
        [&](auto& n) {
            using N = std::remove_cvref_t<decltype(n)>;
            if constexpr (std::is_same_v<N, Unary>) {
                on_expr(static_cast<X&>(*n.operand));
            } else if constexpr (std::is_same_v<N, Binary>) {
                on_expr(static_cast<X&>(*n.lhs));
                on_expr(static_cast<X&>(*n.rhs));
            } else if constexpr (std::is_same_v<N, Between>) {
                on_expr(static_cast<X&>(*n.operand));
                on_expr(static_cast<X&>(*n.low));
                on_expr(static_cast<X&>(*n.high));
            } else if constexpr (std::is_same_v<N, InList>) {
                on_expr(static_cast<X&>(*n.operand));
                for (auto& i : n.items) on_expr(static_cast<X&>(i));
            } else if constexpr (std::is_same_v<N, InSubquery>) {
                on_expr(static_cast<X&>(*n.operand));
                on_query(static_cast<Q&>(*n.query));
            } else if constexpr (std::is_same_v<N, FuncCall>) {
                for (auto& a : n.args) on_expr(static_cast<X&>(a));
            } else if constexpr (std::is_same_v<N, Case>) {
                if (n.operand) on_expr(static_cast<X&>(**n.operand));
                for (auto& w : n.whens) {
                    on_expr(static_cast<X&>(w.when));
                    on_expr(static_cast<X&>(w.then));
                }
                if (n.otherwise) on_expr(static_cast<X&>(**n.otherwise));
            } else if constexpr (std::is_same_v<N, Subquery> || std::is_same_v<N, Exists>) {
                on_query(static_cast<Q&>(*n.query));
            }
        },
        e.node);
}

}  // namespace diel::detail

namespace diel {

template <typename Q, typename Fn>
void for_each_clause_expr(Q& q, Fn&& fn) {
    for (auto& item : q.items) fn(item.expr);
    for (auto& f : q.from)
        if (f.on) fn(*f.on);
    if (q.where) fn(*q.where);
    for (auto& g : q.group_by) fn(g);
    if (q.having) fn(*q.having);
    for (auto& o : q.order_by) fn(o.expr);
    if (q.limit) fn(*q.limit);
    if (q.offset) fn(*q.offset);
}

namespace detail {

template <typename Q, typename Fn>
void walk_queries(Q& q, Fn& fn) {
    fn(q);
    using X = like_const_t<Q, Expr>;
    auto on_query = [&](Q& sub) { walk_queries(sub, fn); };
    std::function<void(X&)> on_expr;
    on_expr = [&](X& e) { expr_children(e, on_expr, on_query); };
    for (auto& f : q.from) {
        if (auto* d = std::get_if<DerivedTable>(&f.source)) walk_queries(static_cast<Q&>(*d->query), fn);
    }
    for_each_clause_expr(q, [&](X& e) { on_expr(e); });
}

template <typename E, typename Fn>
void walk_exprs(E& e, Fn& fn) {
    fn(e);
    auto on_expr = [&](E& c) { walk_exprs(c, fn); };
    auto on_query = [](auto&) {};
    expr_children(e, on_expr, on_query);
}

}  // namespace detail

template <typename Fn>
void for_each_query(const Query& q, Fn&& fn) {
    detail::walk_queries(q, fn);
}

template <typename Fn>
void for_each_query(Query& q, Fn&& fn) {
    detail::walk_queries(q, fn);
}

template <typename Fn>
void for_each_table_ref(const Query& q, Fn&& fn) {
    for_each_query(q, [&](const Query& sub) {
        for (const auto& f : sub.from)
            if (auto* t = std::get_if<TableRef>(&f.source)) fn(*t);
    });
}

template <typename Fn>
void for_each_expr(const Expr& e, Fn&& fn) {
    detail::walk_exprs(e, fn);
}

template <typename Fn>
void for_each_expr(Expr& e, Fn&& fn) {
    detail::walk_exprs(e, fn);
}

}  // namespace diel
