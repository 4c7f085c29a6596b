// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "diel/ast.hpp"

namespace diel {

/// Parses a whole `.diel` program. Statements are `;`-terminated.
/// Throws SyntaxError (code SyntaxError or UnknownKeyword) with the position
/// of the offending token and the set of tokens that would have been accepted.
std::vector<Statement> parse_diel(std::string_view source);

/// Parses a single SELECT; a trailing `;` is allowed.
Query parse_query(std::string_view source);

/// Parses a standalone scalar expression.
Expr parse_expr(std::string_view source);

// ── printing ───────────────────────────────────────────────────

enum class PrintMode {
    Dialect,  // DIEL surface syntax, LATEST modifiers included
    Sql,      // engine SQL; rejects LATEST flags
};

std::string print_expr(const Expr& e, PrintMode mode = PrintMode::Dialect);
std::string print_query(const Query& q, PrintMode mode = PrintMode::Dialect);
std::string print_statement(const Statement& s);
std::string print_program(const std::vector<Statement>& stmts);

/// Quotes `name` with double quotes when it is not a plain identifier.
std::string quote_ident(std::string_view name);

/// Re-serializes template body tokens so that lexing them again yields the
/// same token sequence.
std::string raw_tokens_text(const std::vector<RawToken>& tokens);

/// Indented tree dump used for golden AST snapshots.
std::string dump_ast(const std::vector<Statement>& stmts);

}  // namespace diel
