// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace diel {

std::string to_upper(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

bool Token::is_keyword(std::string_view kw) const {
    return kind == TokenKind::Identifier && !quoted && iequals(text, kw);
}

namespace {

constexpr std::array kReserved = {
    "ALL",    "AND",   "AS",     "ASC",    "BEGIN",  "BETWEEN", "BY",      "CASE",
    "CREATE", "CROSS", "DESC",   "DISTINCT", "ELSE", "END",     "EXISTS",  "FROM",
    "GROUP",  "HAVING", "IN",    "INNER",  "INSERT", "INTO",    "IS",      "JOIN",
    "LEFT",   "LIKE",  "LIMIT",  "NOT",    "NULL",   "OFFSET",  "ON",      "OR",
    "ORDER",  "OUTER", "SELECT", "THEN",   "UNION",  "USING",   "VALUES",  "WHEN",
    "WHERE",  "RIGHT", "EXCEPT", "INTERSECT", "TABLE", "VIEW",
};

constexpr std::array kDialect = {
    "EVENT", "ASYNC", "OUTPUT", "LATEST", "LATEST_REQUEST", "TEMPLATE", "PROGRAM",
    "USE",   "AFTER", "EMPTY",  "CHECK",
};

bool in_list(std::string_view word, const auto& list) {
    return std::any_of(list.begin(), list.end(),
                       [&](const char* k) { return iequals(word, k); });
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space_and_comments();
            Token t;
            t.pos = pos_;
            if (at_end()) {
                t.kind = TokenKind::End;
                t.end = pos_;
                out.push_back(std::move(t));
                return out;
            }
            char c = peek();
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                lex_word(t);
            } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                       (c == '.' && std::isdigit(static_cast<unsigned char>(peek(1))))) {
                lex_number(t);
            } else if (c == '\'') {
                lex_string(t);
            } else if (c == '"' || c == '`') {
                lex_quoted_ident(t, c);
            } else {
                lex_symbol(t);
            }
            t.end = pos_;
            out.push_back(std::move(t));
        }
    }

private:
    bool at_end() const { return idx_ >= src_.size(); }
    char peek(std::size_t ahead = 0) const {
        return idx_ + ahead < src_.size() ? src_[idx_ + ahead] : '\0';
    }

    void advance() {
        if (src_[idx_] == '\n') {
            ++pos_.line;
            pos_.column = 1;
        } else {
            ++pos_.column;
        }
        ++idx_;
        pos_.offset = idx_;
    }

    [[noreturn]] void fail(const std::string& msg, SourcePos at) {
        throw SyntaxError(ErrorCode::SyntaxError, msg, at);
    }

    void skip_space_and_comments() {
        while (!at_end()) {
            char c = peek();
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '-' && peek(1) == '-') {
                while (!at_end() && peek() != '\n') advance();
            } else if (c == '/' && peek(1) == '*') {
                SourcePos start = pos_;
                advance();
                advance();
                while (!at_end() && !(peek() == '*' && peek(1) == '/')) advance();
                if (at_end()) fail("unterminated block comment", start);
                advance();
                advance();
            } else {
                return;
            }
        }
    }

    void lex_word(Token& t) {
        std::size_t start = idx_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
            advance();
        t.kind = TokenKind::Identifier;
        t.text = std::string(src_.substr(start, idx_ - start));
    }

    void lex_number(Token& t) {
        std::size_t start = idx_;
        bool real = false;
        while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        if (peek() == '.') {
            real = true;
            advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if ((peek() == 'e' || peek() == 'E') &&
            (std::isdigit(static_cast<unsigned char>(peek(1))) ||
             ((peek(1) == '+' || peek(1) == '-') &&
              std::isdigit(static_cast<unsigned char>(peek(2)))))) {
            real = true;
            advance();
            if (peek() == '+' || peek() == '-') advance();
            while (std::isdigit(static_cast<unsigned char>(peek()))) advance();
        }
        if (std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')
            fail("malformed number", t.pos);
        t.kind = real ? TokenKind::Real : TokenKind::Integer;
        t.text = std::string(src_.substr(start, idx_ - start));
    }

    void lex_string(Token& t) {
        advance();  // opening quote
        std::string text;
        for (;;) {
            if (at_end()) fail("unterminated string literal", t.pos);
            char c = peek();
            advance();
            if (c == '\'') {
                if (peek() == '\'') {
                    text.push_back('\'');
                    advance();
                    continue;
                }
                break;
            }
            text.push_back(c);
        }
        t.kind = TokenKind::String;
        t.text = std::move(text);
    }

    void lex_quoted_ident(Token& t, char quote) {
        advance();
        std::string text;
        for (;;) {
            if (at_end()) fail("unterminated quoted identifier", t.pos);
            char c = peek();
            advance();
            if (c == quote) {
                if (peek() == quote) {
                    text.push_back(quote);
                    advance();
                    continue;
                }
                break;
            }
            text.push_back(c);
        }
        if (text.empty()) fail("empty quoted identifier", t.pos);
        t.kind = TokenKind::Identifier;
        t.quoted = true;
        t.text = std::move(text);
    }

    void lex_symbol(Token& t) {
        static constexpr std::array kTwo = {"<=", ">=", "<>", "!=", "==", "||"};
        t.kind = TokenKind::Symbol;
        for (const char* two : kTwo) {
            if (peek() == two[0] && peek(1) == two[1]) {
                t.text = two;
                advance();
                advance();
                return;
            }
        }
        static constexpr std::string_view kOne = "(),;.*+-/%=<>{}";
        char c = peek();
        if (kOne.find(c) == std::string_view::npos) {
            fail(std::string("unexpected character '") + c + "'", pos_);
        }
        t.text = std::string(1, c);
        advance();
    }

    std::string_view src_;
    std::size_t idx_ = 0;
    SourcePos pos_;
};

}  // namespace

bool is_reserved_word(std::string_view word) { return in_list(word, kReserved); }
bool is_dialect_word(std::string_view word) { return in_list(word, kDialect); }

std::vector<Token> tokenize(std::string_view source) { return Lexer(source).run(); }

}  // namespace diel
