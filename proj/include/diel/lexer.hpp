// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "diel/error.hpp"

namespace diel {

enum class TokenKind {
    Identifier,  // bare or "quoted"; keywords are bare identifiers, matched in context
    Integer,
    Real,
    String,
    Symbol,
    End,
};

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier name, literal contents, or symbol spelling
    bool quoted = false;
    SourcePos pos;
    SourcePos end;

    /// True for an unquoted identifier spelled `kw`, case-insensitively.
    bool is_keyword(std::string_view kw) const;
    bool is_symbol(std::string_view sym) const {
        return kind == TokenKind::Symbol && text == sym;
    }
};

/// Splits DIEL source into tokens. `--` and `/* */` comments are skipped.
/// The returned vector always ends with an End token.
std::vector<Token> tokenize(std::string_view source);

/// Words that may not be used as bare identifiers or implicit aliases.
bool is_reserved_word(std::string_view word);

/// Words with dialect meaning; they stay usable as identifiers where the
/// grammar is unambiguous, and are quoted by the printer.
bool is_dialect_word(std::string_view word);

std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

}  // namespace diel
