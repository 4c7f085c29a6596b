// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/parser.hpp"

#include <charconv>
#include <cstdlib>

#include "diel/lexer.hpp"

namespace diel {

namespace {

std::string describe(const Token& t) {
    switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::String: return "string '" + t.text + "'";
    case TokenKind::Identifier: return t.quoted ? "\"" + t.text + "\"" : "'" + t.text + "'";
    default: return "'" + t.text + "'";
    }
}

std::string default_program_name(const std::vector<std::string>& triggers) {
    std::string name = "after";
    for (const auto& t : triggers) name += "_" + t;
    return name;
}

class Parser {
public:
    explicit Parser(std::string_view src) : tokens_(tokenize(src)) {}

    std::vector<Statement> program() {
        std::vector<Statement> out;
        while (!at_end()) {
            if (accept_sym(";")) continue;
            SourcePos begin = peek().pos;
            Statement s = statement();
            const Token& semi = peek();
            expect_sym(";");
            s.span = SourceSpan{begin, semi.end};
            out.push_back(std::move(s));
        }
        return out;
    }

    Query single_query() {
        Query q = select();
        accept_sym(";");
        expect_end();
        return q;
    }

    Expr single_expr() {
        Expr e = expr();
        expect_end();
        return e;
    }

private:
    // ── token helpers ──────────────────────────────────────────

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(i_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    const Token& next() {
        const Token& t = tokens_[i_];
        if (i_ + 1 < tokens_.size()) ++i_;
        return t;
    }
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool accept_kw(std::string_view kw) {
        if (peek().is_keyword(kw)) {
            next();
            return true;
        }
        return false;
    }
    bool accept_sym(std::string_view s) {
        if (peek().is_symbol(s)) {
            next();
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(std::vector<std::string> expected,
                           ErrorCode code = ErrorCode::SyntaxError) {
        throw SyntaxError(code, "unexpected " + describe(peek()), peek().pos,
                          std::move(expected));
    }
    [[noreturn]] void fail_msg(const std::string& msg, const Token& at) {
        throw SyntaxError(ErrorCode::SyntaxError, msg, at.pos);
    }

    void expect_kw(std::string_view kw) {
        if (!accept_kw(kw)) fail({std::string(kw)});
    }
    void expect_sym(std::string_view s) {
        if (!accept_sym(s)) fail({"'" + std::string(s) + "'"});
    }
    void expect_end() {
        if (!at_end()) fail({"end of input"});
    }

    /// An identifier usable as a name: quoted, or bare and not reserved.
    bool is_name(const Token& t) const {
        return t.kind == TokenKind::Identifier && (t.quoted || !is_reserved_word(t.text));
    }
    std::string name(const char* what = "identifier") {
        if (!is_name(peek())) fail({what});
        return next().text;
    }

    // ── statements ─────────────────────────────────────────────

    Statement statement() {
        if (peek().is_keyword("CREATE")) {
            next();
            return create();
        }
        if (peek().is_keyword("INSERT"))
            fail_msg("INSERT is only allowed inside CREATE PROGRAM ... BEGIN ... END", peek());
        if (is_name(peek()) && peek(1).is_keyword("NOT") && peek(2).is_keyword("EMPTY")) {
            Statement s;
            s.kind = StatementKind::Constraint;
            s.name = next().text;
            next();
            next();
            s.body = ViewConstraint{s.name, ConstraintKind::NotEmpty};
            return s;
        }
        fail({"CREATE", "<view> NOT EMPTY"});
    }

    Statement create() {
        Statement s;
        if (accept_kw("EVENT")) {
            if (!accept_kw("TABLE")) fail({"TABLE"}, ErrorCode::UnknownKeyword);
            s.kind = StatementKind::CreateEventTable;
            s.name = name("table name");
            table_body(s, /*event=*/true);
            return s;
        }
        if (accept_kw("TABLE")) {
            s.kind = StatementKind::CreateTable;
            s.name = name("table name");
            table_body(s, /*event=*/false);
            return s;
        }
        if (accept_kw("VIEW")) {
            s.kind = StatementKind::CreateView;
            view_body(s);
            return s;
        }
        if (accept_kw("ASYNC")) {
            if (!accept_kw("VIEW")) fail({"VIEW"}, ErrorCode::UnknownKeyword);
            s.kind = StatementKind::CreateAsyncView;
            view_body(s);
            return s;
        }
        if (accept_kw("OUTPUT")) {
            s.kind = StatementKind::CreateOutput;
            view_body(s);
            return s;
        }
        if (accept_kw("TEMPLATE")) {
            s.kind = StatementKind::CreateTemplate;
            s.name = name("template name");
            s.body = template_def();
            return s;
        }
        if (accept_kw("PROGRAM")) {
            s.kind = StatementKind::CreateProgram;
            std::optional<std::string> explicit_name;
            if (!peek().is_keyword("AFTER")) explicit_name = name("program name");
            expect_kw("AFTER");
            ProgramBody body = program_body();
            s.name = explicit_name ? *explicit_name : default_program_name(body.triggers);
            s.body = std::move(body);
            return s;
        }
        fail({"EVENT TABLE", "TABLE", "VIEW", "ASYNC VIEW", "OUTPUT", "TEMPLATE", "PROGRAM"},
             ErrorCode::UnknownKeyword);
    }

    void table_body(Statement& s, bool event) {
        if (accept_kw("AS")) {
            if (peek().is_keyword("SELECT"))
                fail_msg("CREATE TABLE ... AS SELECT is not supported; only schema copy "
                         "(AS <relation>) is",
                         peek());
            s.kind = StatementKind::CreateTableAsSchemaCopy;
            s.copy_into_event_table = event;
            s.body = SchemaCopy{name("relation name")};
            return;
        }
        if (!peek().is_symbol("(")) fail({"'('", "AS"});
        next();
        std::vector<ColumnDef> cols;
        if (!accept_sym(")")) {
            do {
                cols.push_back(column_def());
            } while (accept_sym(","));
            expect_sym(")");
        }
        s.body = std::move(cols);
    }

    ColumnDef column_def() {
        ColumnDef c;
        c.name = name("column name");
        const Token& t = peek();
        if (t.is_keyword("INT") || t.is_keyword("INTEGER")) {
            c.type = ColumnType::Int;
        } else if (t.is_keyword("REAL")) {
            c.type = ColumnType::Real;
        } else if (t.is_keyword("TEXT")) {
            c.type = ColumnType::Text;
        } else {
            fail({"INT", "INTEGER", "REAL", "TEXT"});
        }
        next();
        if (accept_kw("CHECK")) c.check = expr();
        return c;
    }

    void view_body(Statement& s) {
        s.name = name("view name");
        expect_kw("AS");
        if (accept_kw("USE")) {
            expect_kw("TEMPLATE");
            TemplateUse use;
            use.template_name = name("template name");
            expect_sym("(");
            if (!accept_sym(")")) {
                do {
                    std::string var = name("template variable");
                    expect_sym("=");
                    if (peek().kind != TokenKind::String) fail({"string literal"});
                    use.bindings.emplace_back(std::move(var), next().text);
                } while (accept_sym(","));
                expect_sym(")");
            }
            s.body = std::move(use);
            return;
        }
        if (!peek().is_keyword("SELECT")) fail({"SELECT", "USE TEMPLATE"});
        s.body = select();
    }

    TemplateDef template_def() {
        TemplateDef def;
        expect_sym("(");
        if (!accept_sym(")")) {
            do {
                def.params.push_back(name("template variable"));
            } while (accept_sym(","));
            expect_sym(")");
        }
        expect_kw("AS");
        int depth = 0;
        while (!at_end() && !(depth == 0 && peek().is_symbol(";"))) {
            const Token& t = next();
            if (t.is_symbol("(")) ++depth;
            if (t.is_symbol(")")) --depth;
            RawToken rt;
            switch (t.kind) {
            case TokenKind::Identifier:
                rt.kind = t.quoted ? RawToken::Kind::QuotedWord : RawToken::Kind::Word;
                break;
            case TokenKind::Integer:
            case TokenKind::Real: rt.kind = RawToken::Kind::Number; break;
            case TokenKind::String: rt.kind = RawToken::Kind::String; break;
            default: rt.kind = RawToken::Kind::Symbol; break;
            }
            rt.text = t.text;
            def.body.push_back(std::move(rt));
        }
        if (def.body.empty()) fail({"template body"});
        return def;
    }

    ProgramBody program_body() {
        ProgramBody body;
        expect_sym("(");
        do {
            body.triggers.push_back(name("event table name"));
        } while (accept_sym(","));
        expect_sym(")");
        expect_kw("BEGIN");
        while (!peek().is_keyword("END")) {
            if (accept_kw("INSERT")) {
                expect_kw("INTO");
                InsertStatement ins;
                ins.target = name("table name");
                if (accept_sym("(")) {
                    do {
                        ins.columns.push_back(name("column name"));
                    } while (accept_sym(","));
                    expect_sym(")");
                }
                if (!peek().is_keyword("SELECT")) fail({"SELECT"});
                ins.query = select();
                body.commands.emplace_back(std::move(ins));
            } else if (peek().is_keyword("SELECT")) {
                body.commands.emplace_back(select());
            } else {
                fail({"INSERT", "SELECT", "END"});
            }
            expect_sym(";");
        }
        next();  // END
        return body;
    }

    // ── queries ────────────────────────────────────────────────

    Query select() {
        expect_kw("SELECT");
        Query q;
        if (accept_kw("DISTINCT")) q.distinct = true;
        else accept_kw("ALL");
        do {
            q.items.push_back(select_item());
        } while (accept_sym(","));
        if (accept_kw("FROM")) from_clause(q);
        if (accept_kw("WHERE")) q.where = expr();
        if (accept_kw("GROUP")) {
            expect_kw("BY");
            do {
                q.group_by.push_back(expr());
            } while (accept_sym(","));
        }
        if (accept_kw("HAVING")) q.having = expr();
        if (accept_kw("ORDER")) {
            expect_kw("BY");
            do {
                OrderItem o;
                o.expr = expr();
                if (accept_kw("DESC")) o.descending = true;
                else accept_kw("ASC");
                q.order_by.push_back(std::move(o));
            } while (accept_sym(","));
        }
        if (accept_kw("LIMIT")) {
            q.limit = expr();
            if (accept_kw("OFFSET")) q.offset = expr();
        }
        return q;
    }

    std::optional<std::string> alias() {
        if (accept_kw("AS")) return name("alias");
        if (is_name(peek()) && !peek().is_keyword("LATEST") &&
            !peek().is_keyword("LATEST_REQUEST"))
            return next().text;
        return std::nullopt;
    }

    SelectItem select_item() {
        SelectItem item;
        if (accept_sym("*")) {
            item.expr = Star{};
            return item;
        }
        if (is_name(peek()) && peek(1).is_symbol(".") && peek(2).is_symbol("*")) {
            std::string q = next().text;
            next();
            next();
            item.expr = Star{q};
            return item;
        }
        item.expr = expr();
        item.alias = alias();
        return item;
    }

    void from_clause(Query& q) {
        q.from.push_back(from_item(JoinKind::First));
        for (;;) {
            JoinKind kind;
            if (accept_sym(",")) {
                kind = JoinKind::Comma;
            } else if (accept_kw("JOIN")) {
                kind = JoinKind::Inner;
            } else if (accept_kw("INNER")) {
                expect_kw("JOIN");
                kind = JoinKind::Inner;
            } else if (accept_kw("LEFT")) {
                accept_kw("OUTER");
                expect_kw("JOIN");
                kind = JoinKind::Left;
            } else if (accept_kw("CROSS")) {
                expect_kw("JOIN");
                kind = JoinKind::Cross;
            } else {
                break;
            }
            FromItem item = from_item(kind);
            if ((kind == JoinKind::Inner || kind == JoinKind::Left) && accept_kw("ON"))
                item.on = expr();
            q.from.push_back(std::move(item));
        }
    }

    FromItem from_item(JoinKind kind) {
        FromItem item;
        item.join = kind;
        if (accept_sym("(")) {
            if (!peek().is_keyword("SELECT")) fail({"SELECT"});
            DerivedTable d;
            d.query = select();
            expect_sym(")");
            auto a = alias();
            if (!a) fail({"alias for derived table"});
            d.alias = *a;
            item.source = std::move(d);
            return item;
        }
        TableRef ref;
        const Token& t = peek();
        if ((t.is_keyword("LATEST") || t.is_keyword("LATEST_REQUEST")) && is_name(peek(1))) {
            if (t.is_keyword("LATEST")) ref.latest = true;
            else ref.latest_request = true;
            next();
            if (peek().is_keyword("LATEST") || peek().is_keyword("LATEST_REQUEST"))
                fail_msg("LATEST and LATEST_REQUEST cannot be combined", peek());
        }
        ref.relation = name("relation name");
        ref.alias = alias();
        item.source = std::move(ref);
        return item;
    }

    // ── expressions ────────────────────────────────────────────

    Expr expr() { return or_expr(); }

    static Expr binary(BinaryOp op, Expr lhs, Expr rhs) {
        return Binary{op, Box<Expr>(std::move(lhs)), Box<Expr>(std::move(rhs))};
    }

    Expr or_expr() {
        Expr lhs = and_expr();
        while (accept_kw("OR")) lhs = binary(BinaryOp::Or, std::move(lhs), and_expr());
        return lhs;
    }

    Expr and_expr() {
        Expr lhs = not_expr();
        while (accept_kw("AND")) lhs = binary(BinaryOp::And, std::move(lhs), not_expr());
        return lhs;
    }

    Expr not_expr() {
        if (peek().is_keyword("NOT") && !peek(1).is_keyword("EMPTY")) {
            next();
            return Unary{UnaryOp::Not, Box<Expr>(not_expr())};
        }
        return equality();
    }

    Expr equality() {
        Expr lhs = relational();
        for (;;) {
            if (accept_sym("=") || accept_sym("==")) {
                lhs = binary(BinaryOp::Eq, std::move(lhs), relational());
            } else if (accept_sym("!=") || accept_sym("<>")) {
                lhs = binary(BinaryOp::Ne, std::move(lhs), relational());
            } else if (accept_kw("IS")) {
                BinaryOp op = accept_kw("NOT") ? BinaryOp::IsNot : BinaryOp::Is;
                lhs = binary(op, std::move(lhs), relational());
            } else if (peek().is_keyword("NOT") &&
                       (peek(1).is_keyword("IN") || peek(1).is_keyword("LIKE") ||
                        peek(1).is_keyword("BETWEEN"))) {
                next();
                lhs = predicate_tail(std::move(lhs), true);
            } else if (peek().is_keyword("IN") || peek().is_keyword("LIKE") ||
                       peek().is_keyword("BETWEEN")) {
                lhs = predicate_tail(std::move(lhs), false);
            } else {
                return lhs;
            }
        }
    }

    Expr predicate_tail(Expr lhs, bool negated) {
        if (accept_kw("LIKE"))
            return binary(negated ? BinaryOp::NotLike : BinaryOp::Like, std::move(lhs),
                          relational());
        if (accept_kw("BETWEEN")) {
            Expr low = relational();
            expect_kw("AND");
            Expr high = relational();
            return Between{Box<Expr>(std::move(lhs)), Box<Expr>(std::move(low)),
                           Box<Expr>(std::move(high)), negated};
        }
        expect_kw("IN");
        expect_sym("(");
        if (peek().is_keyword("SELECT")) {
            Query q = select();
            expect_sym(")");
            return InSubquery{Box<Expr>(std::move(lhs)), Box<Query>(std::move(q)), negated};
        }
        InList in{Box<Expr>(std::move(lhs)), {}, negated};
        if (!accept_sym(")")) {
            do {
                in.items.push_back(expr());
            } while (accept_sym(","));
            expect_sym(")");
        }
        return in;
    }

    Expr relational() {
        Expr lhs = additive();
        for (;;) {
            BinaryOp op;
            if (accept_sym("<")) op = BinaryOp::Lt;
            else if (accept_sym("<=")) op = BinaryOp::Le;
            else if (accept_sym(">")) op = BinaryOp::Gt;
            else if (accept_sym(">=")) op = BinaryOp::Ge;
            else return lhs;
            lhs = binary(op, std::move(lhs), additive());
        }
    }

    Expr additive() {
        Expr lhs = multiplicative();
        for (;;) {
            BinaryOp op;
            if (accept_sym("+")) op = BinaryOp::Add;
            else if (accept_sym("-")) op = BinaryOp::Sub;
            else return lhs;
            lhs = binary(op, std::move(lhs), multiplicative());
        }
    }

    Expr multiplicative() {
        Expr lhs = concat();
        for (;;) {
            BinaryOp op;
            if (accept_sym("*")) op = BinaryOp::Mul;
            else if (accept_sym("/")) op = BinaryOp::Div;
            else if (accept_sym("%")) op = BinaryOp::Mod;
            else return lhs;
            lhs = binary(op, std::move(lhs), concat());
        }
    }

    Expr concat() {
        Expr lhs = unary();
        while (accept_sym("||")) lhs = binary(BinaryOp::Concat, std::move(lhs), unary());
        return lhs;
    }

    Expr unary() {
        if (accept_sym("-")) return Unary{UnaryOp::Neg, Box<Expr>(unary())};
        if (accept_sym("+")) return Unary{UnaryOp::Plus, Box<Expr>(unary())};
        return primary();
    }

    Expr number(const Token& t) {
        if (t.kind == TokenKind::Integer) {
            std::int64_t v = 0;
            auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
            if (ec == std::errc() && p == t.text.data() + t.text.size()) return Literal{v};
        }
        return Literal{std::strtod(t.text.c_str(), nullptr)};
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
        case TokenKind::Integer:
        case TokenKind::Real: return number(next());
        case TokenKind::String: return Literal{next().text};
        default: break;
        }
        if (accept_kw("NULL")) return Literal{std::monostate{}};
        if (accept_sym("(")) {
            if (peek().is_keyword("SELECT")) {
                Query q = select();
                expect_sym(")");
                return Subquery{Box<Query>(std::move(q))};
            }
            Expr e = expr();
            expect_sym(")");
            return e;
        }
        if (accept_kw("CASE")) return case_expr();
        if (accept_kw("EXISTS")) {
            expect_sym("(");
            Query q = select();
            expect_sym(")");
            return Exists{Box<Query>(std::move(q))};
        }
        if (is_name(t)) {
            if (!t.quoted && peek(1).is_symbol("(")) return call();
            std::string first = next().text;
            if (accept_sym(".")) {
                if (accept_sym("*")) return Star{first};
                return ColumnRef{first, name("column name")};
            }
            return ColumnRef{std::nullopt, std::move(first)};
        }
        fail({"expression"});
    }

    Expr call() {
        FuncCall f;
        f.name = next().text;
        next();  // (
        if (accept_sym(")")) return f;
        if (accept_kw("DISTINCT")) f.distinct = true;
        if (accept_sym("*")) {
            f.args.push_back(Star{});
        } else {
            do {
                if (is_name(peek()) && peek(1).is_symbol(".") && peek(2).is_symbol("*")) {
                    std::string q = next().text;
                    next();
                    next();
                    f.args.push_back(Star{q});
                } else {
                    f.args.push_back(expr());
                }
            } while (accept_sym(","));
        }
        expect_sym(")");
        return f;
    }

    Expr case_expr() {
        Case c;
        if (!peek().is_keyword("WHEN")) c.operand = Box<Expr>(expr());
        while (accept_kw("WHEN")) {
            Expr when = expr();
            expect_kw("THEN");
            Expr then = expr();
            c.whens.push_back(CaseWhen{std::move(when), std::move(then)});
        }
        if (c.whens.empty()) fail({"WHEN"});
        if (accept_kw("ELSE")) c.otherwise = Box<Expr>(expr());
        expect_kw("END");
        return c;
    }

    std::vector<Token> tokens_;
    std::size_t i_ = 0;
};

}  // namespace

std::vector<Statement> parse_diel(std::string_view source) { return Parser(source).program(); }

Query parse_query(std::string_view source) { return Parser(source).single_query(); }

Expr parse_expr(std::string_view source) { return Parser(source).single_expr(); }

std::string_view statement_kind_name(StatementKind kind) {
    switch (kind) {
    case StatementKind::CreateEventTable: return "CreateEventTable";
    case StatementKind::CreateTable: return "CreateTable";
    case StatementKind::CreateTableAsSchemaCopy: return "CreateTableAsSchemaCopy";
    case StatementKind::CreateView: return "CreateView";
    case StatementKind::CreateAsyncView: return "CreateAsyncView";
    case StatementKind::CreateOutput: return "CreateOutput";
    case StatementKind::CreateTemplate: return "CreateTemplate";
    case StatementKind::CreateProgram: return "CreateProgram";
    case StatementKind::InsertStatement: return "InsertStatement";
    case StatementKind::Constraint: return "Constraint";
    }
    return "?";
}

std::string_view column_type_name(ColumnType type) {
    switch (type) {
    case ColumnType::Int: return "INT";
    case ColumnType::Real: return "REAL";
    case ColumnType::Text: return "TEXT";
    case ColumnType::Any: return "ANY";
    }
    return "?";
}

}  // namespace diel
