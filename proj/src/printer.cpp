// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "diel/lexer.hpp"
#include "diel/parser.hpp"

namespace diel {

namespace {

// Binding strength, mirroring the parser's precedence levels.
enum Prec : int {
    kOr = 1,
    kAnd,
    kNot,
    kEquality,
    kRelational,
    kAdditive,
    kMultiplicative,
    kConcat,
    kUnary,
    kPrimary,
};

int binary_prec(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return kOr;
    case BinaryOp::And: return kAnd;
    case BinaryOp::Eq:
    case BinaryOp::Ne:
    case BinaryOp::Is:
    case BinaryOp::IsNot:
    case BinaryOp::Like:
    case BinaryOp::NotLike: return kEquality;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return kRelational;
    case BinaryOp::Add:
    case BinaryOp::Sub: return kAdditive;
    case BinaryOp::Mul:
    case BinaryOp::Div:
    case BinaryOp::Mod: return kMultiplicative;
    case BinaryOp::Concat: return kConcat;
    }
    return kPrimary;
}

const char* binary_text(BinaryOp op) {
    switch (op) {
    case BinaryOp::Or: return "OR";
    case BinaryOp::And: return "AND";
    case BinaryOp::Eq: return "=";
    case BinaryOp::Ne: return "<>";
    case BinaryOp::Is: return "IS";
    case BinaryOp::IsNot: return "IS NOT";
    case BinaryOp::Like: return "LIKE";
    case BinaryOp::NotLike: return "NOT LIKE";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Div: return "/";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Concat: return "||";
    }
    return "?";
}

int prec_of(const Expr& e) {
    if (auto* b = std::get_if<Binary>(&e.node)) return binary_prec(b->op);
    if (auto* u = std::get_if<Unary>(&e.node)) return u->op == UnaryOp::Not ? kNot : kUnary;
    if (e.is<Between>() || e.is<InList>() || e.is<InSubquery>()) return kEquality;
    return kPrimary;
}

std::string format_real(double d) {
    if (std::isnan(d)) return "NULL";
    if (std::isinf(d)) return d > 0 ? "1e999" : "-1e999";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
    std::string s(buf, end);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

std::string quote_string(std::string_view s) {
    std::string out = "'";
    for (char c : s) {
        if (c == '\'') out += "''";
        else out += c;
    }
    out += "'";
    return out;
}

class Printer {
public:
    explicit Printer(PrintMode mode) : mode_(mode) {}

    std::string expr(const Expr& e) const {
        return std::visit([&](const auto& n) { return node(n); }, e.node);
    }

    std::string query(const Query& q) const {
        std::string out = "SELECT ";
        if (q.distinct) out += "DISTINCT ";
        for (std::size_t i = 0; i < q.items.size(); ++i) {
            if (i) out += ", ";
            out += expr(q.items[i].expr);
            if (q.items[i].alias) out += " AS " + quote_ident(*q.items[i].alias);
        }
        if (!q.from.empty()) {
            out += " FROM ";
            for (const auto& f : q.from) out += from_item(f);
        }
        if (q.where) out += " WHERE " + expr(*q.where);
        if (!q.group_by.empty()) {
            out += " GROUP BY ";
            for (std::size_t i = 0; i < q.group_by.size(); ++i) {
                if (i) out += ", ";
                out += expr(q.group_by[i]);
            }
        }
        if (q.having) out += " HAVING " + expr(*q.having);
        if (!q.order_by.empty()) {
            out += " ORDER BY ";
            for (std::size_t i = 0; i < q.order_by.size(); ++i) {
                if (i) out += ", ";
                out += expr(q.order_by[i].expr);
                if (q.order_by[i].descending) out += " DESC";
            }
        }
        if (q.limit) out += " LIMIT " + expr(*q.limit);
        if (q.offset) out += " OFFSET " + expr(*q.offset);
        return out;
    }

private:
    std::string wrap(const Expr& e, int min_prec) const {
        std::string s = expr(e);
        return prec_of(e) < min_prec ? "(" + s + ")" : s;
    }

    std::string from_item(const FromItem& f) const {
        std::string out;
        switch (f.join) {
        case JoinKind::First: break;
        case JoinKind::Comma: out += ", "; break;
        case JoinKind::Inner: out += " JOIN "; break;
        case JoinKind::Left: out += " LEFT JOIN "; break;
        case JoinKind::Cross: out += " CROSS JOIN "; break;
        }
        if (auto* t = std::get_if<TableRef>(&f.source)) {
            if (t->latest || t->latest_request) {
                if (mode_ == PrintMode::Sql)
                    throw std::logic_error("LATEST reference to " + t->relation +
                                           " survived into engine SQL");
                out += t->latest ? "LATEST " : "LATEST_REQUEST ";
            }
            out += quote_ident(t->relation);
            if (t->alias) out += " AS " + quote_ident(*t->alias);
        } else {
            const auto& d = std::get<DerivedTable>(f.source);
            out += "(" + query(*d.query) + ") AS " + quote_ident(d.alias);
        }
        if (f.on) out += " ON " + expr(*f.on);
        return out;
    }

    std::string node(const Literal& l) const {
        return std::visit(
            [](const auto& v) -> std::string {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, std::monostate>) return "NULL";
                else if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(v);
                else if constexpr (std::is_same_v<T, double>) return format_real(v);
                else return quote_string(v);
            },
            l.value);
    }
    std::string node(const ColumnRef& c) const {
        std::string out;
        if (c.qualifier) out = quote_ident(*c.qualifier) + ".";
        return out + quote_ident(c.name);
    }
    std::string node(const Star& s) const {
        return s.qualifier ? quote_ident(*s.qualifier) + ".*" : "*";
    }
    std::string node(const Unary& u) const {
        switch (u.op) {
        case UnaryOp::Not: return "NOT " + wrap(*u.operand, kNot);
        case UnaryOp::Neg: {
            // Keep "- -x" from lexing as a comment.
            std::string s = wrap(*u.operand, kUnary);
            return s.starts_with("-") ? "-(" + s + ")" : "-" + s;
        }
        case UnaryOp::Plus: return "+" + wrap(*u.operand, kUnary);
        }
        return "";
    }
    std::string node(const Binary& b) const {
        int p = binary_prec(b.op);
        return wrap(*b.lhs, p) + " " + binary_text(b.op) + " " + wrap(*b.rhs, p + 1);
    }
    std::string node(const Between& b) const {
        return wrap(*b.operand, kEquality) + (b.negated ? " NOT BETWEEN " : " BETWEEN ") +
               wrap(*b.low, kRelational) + " AND " + wrap(*b.high, kRelational);
    }
    std::string node(const InList& in) const {
        std::string out = wrap(*in.operand, kEquality) + (in.negated ? " NOT IN (" : " IN (");
        for (std::size_t i = 0; i < in.items.size(); ++i) {
            if (i) out += ", ";
            out += expr(in.items[i]);
        }
        return out + ")";
    }
    std::string node(const InSubquery& in) const {
        return wrap(*in.operand, kEquality) + (in.negated ? " NOT IN (" : " IN (") +
               query(*in.query) + ")";
    }
    std::string node(const FuncCall& f) const {
        std::string out = f.name + "(";
        if (f.distinct) out += "DISTINCT ";
        for (std::size_t i = 0; i < f.args.size(); ++i) {
            if (i) out += ", ";
            out += expr(f.args[i]);
        }
        return out + ")";
    }
    std::string node(const Case& c) const {
        std::string out = "CASE";
        if (c.operand) out += " " + expr(**c.operand);
        for (const auto& w : c.whens) out += " WHEN " + expr(w.when) + " THEN " + expr(w.then);
        if (c.otherwise) out += " ELSE " + expr(**c.otherwise);
        return out + " END";
    }
    std::string node(const Subquery& s) const { return "(" + query(*s.query) + ")"; }
    std::string node(const Exists& e) const { return "EXISTS (" + query(*e.query) + ")"; }

    PrintMode mode_;
};

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += quote_ident(names[i]);
    }
    return out;
}

std::string raw_token_text(const RawToken& t) {
    switch (t.kind) {
    case RawToken::Kind::QuotedWord: {
        std::string out = "\"";
        for (char c : t.text) {
            if (c == '"') out += "\"\"";
            else out += c;
        }
        return out + "\"";
    }
    case RawToken::Kind::String: return quote_string(t.text);
    default: return t.text;
    }
}

std::string columns_text(const std::vector<ColumnDef>& cols) {
    Printer p(PrintMode::Dialect);
    std::string out = "(";
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ", ";
        out += quote_ident(cols[i].name) + " " + std::string(column_type_name(cols[i].type));
        if (cols[i].check) out += " CHECK (" + p.expr(*cols[i].check) + ")";
    }
    return out + ")";
}

std::string view_body_text(const StatementBody& body) {
    if (auto* q = std::get_if<Query>(&body)) return Printer(PrintMode::Dialect).query(*q);
    const auto& use = std::get<TemplateUse>(body);
    std::string out = "USE TEMPLATE " + quote_ident(use.template_name) + "(";
    for (std::size_t i = 0; i < use.bindings.size(); ++i) {
        if (i) out += ", ";
        out += quote_ident(use.bindings[i].first) + " = " + quote_string(use.bindings[i].second);
    }
    return out + ")";
}

}  // namespace

std::string quote_ident(std::string_view name) {
    bool plain = !name.empty() &&
                 (std::isalpha(static_cast<unsigned char>(name[0])) || name[0] == '_');
    for (char c : name)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') plain = false;
    if (plain && !is_reserved_word(name) && !is_dialect_word(name)) return std::string(name);
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    return out + "\"";
}

std::string raw_tokens_text(const std::vector<RawToken>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out += " ";
        out += raw_token_text(t);
    }
    return out;
}

std::string print_expr(const Expr& e, PrintMode mode) { return Printer(mode).expr(e); }

std::string print_query(const Query& q, PrintMode mode) { return Printer(mode).query(q); }

std::string print_statement(const Statement& s) {
    Printer p(PrintMode::Dialect);
    std::string name = quote_ident(s.name);
    switch (s.kind) {
    case StatementKind::CreateEventTable:
        return "CREATE EVENT TABLE " + name + " " +
               columns_text(std::get<std::vector<ColumnDef>>(s.body)) + ";";
    case StatementKind::CreateTable:
        return "CREATE TABLE " + name + " " +
               columns_text(std::get<std::vector<ColumnDef>>(s.body)) + ";";
    case StatementKind::CreateTableAsSchemaCopy:
        return std::string("CREATE ") + (s.copy_into_event_table ? "EVENT " : "") + "TABLE " +
               name + " AS " + quote_ident(std::get<SchemaCopy>(s.body).source) + ";";
    case StatementKind::CreateView: return "CREATE VIEW " + name + " AS " + view_body_text(s.body) + ";";
    case StatementKind::CreateAsyncView:
        return "CREATE ASYNC VIEW " + name + " AS " + view_body_text(s.body) + ";";
    case StatementKind::CreateOutput:
        return "CREATE OUTPUT " + name + " AS " + view_body_text(s.body) + ";";
    case StatementKind::CreateTemplate: {
        const auto& def = std::get<TemplateDef>(s.body);
        std::string out = "CREATE TEMPLATE " + name + "(" + join_names(def.params) + ") AS";
        for (const auto& t : def.body) out += " " + raw_token_text(t);
        return out + ";";
    }
    case StatementKind::CreateProgram: {
        const auto& body = std::get<ProgramBody>(s.body);
        std::string fallback = "after";
        for (const auto& t : body.triggers) fallback += "_" + t;
        std::string out = "CREATE PROGRAM ";
        if (s.name != fallback) out += name + " ";
        out += "AFTER (" + join_names(body.triggers) + ") BEGIN";
        for (const auto& cmd : body.commands) {
            if (auto* ins = std::get_if<InsertStatement>(&cmd)) {
                out += " INSERT INTO " + quote_ident(ins->target);
                if (!ins->columns.empty()) out += " (" + join_names(ins->columns) + ")";
                out += " " + p.query(ins->query) + ";";
            } else {
                out += " " + p.query(std::get<Query>(cmd)) + ";";
            }
        }
        return out + " END;";
    }
    case StatementKind::InsertStatement: {
        const auto& ins = std::get<InsertStatement>(s.body);
        std::string out = "INSERT INTO " + quote_ident(ins.target);
        if (!ins.columns.empty()) out += " (" + join_names(ins.columns) + ")";
        return out + " " + p.query(ins.query) + ";";
    }
    case StatementKind::Constraint: return name + " NOT EMPTY;";
    }
    return "";
}

std::string print_program(const std::vector<Statement>& stmts) {
    std::string out;
    for (const auto& s : stmts) out += print_statement(s) + "\n";
    return out;
}

// ── AST dump ───────────────────────────────────────────────────

namespace {

class Dumper {
public:
    std::string str() const { return out_.str(); }

    void statement(const Statement& s) {
        line(0, std::string(statement_kind_name(s.kind)) + " " + s.name);
        std::visit([&](const auto& b) { body(b, 1); }, s.body);
    }

private:
    void line(int depth, const std::string& text) {
        out_ << std::string(static_cast<std::size_t>(depth) * 2, ' ') << text << "\n";
    }

    void body(const std::monostate&, int) {}
    void body(const std::vector<ColumnDef>& cols, int d) {
        for (const auto& c : cols) {
            line(d, "column " + c.name + " " + std::string(column_type_name(c.type)));
            if (c.check) {
                line(d + 1, "check");
                expr(*c.check, d + 2);
            }
        }
    }
    void body(const SchemaCopy& c, int d) { line(d, "schema_of " + c.source); }
    void body(const Query& q, int d) { query(q, d); }
    void body(const TemplateDef& t, int d) {
        std::string params;
        for (const auto& p : t.params) params += " " + p;
        line(d, "params" + params);
        std::string toks;
        for (const auto& tok : t.body) toks += " " + raw_token_text(tok);
        line(d, "body" + toks);
    }
    void body(const TemplateUse& u, int d) {
        line(d, "use " + u.template_name);
        for (const auto& [k, v] : u.bindings) line(d + 1, k + " = " + quote_string(v));
    }
    void body(const ProgramBody& p, int d) {
        std::string trig;
        for (const auto& t : p.triggers) trig += " " + t;
        line(d, "after" + trig);
        for (const auto& cmd : p.commands) {
            if (auto* ins = std::get_if<InsertStatement>(&cmd)) body(*ins, d);
            else query(std::get<Query>(cmd), d);
        }
    }
    void body(const InsertStatement& ins, int d) {
        std::string cols;
        for (const auto& c : ins.columns) cols += " " + c;
        line(d, "insert " + ins.target + (cols.empty() ? "" : " (" + cols.substr(1) + ")"));
        query(ins.query, d + 1);
    }
    void body(const ViewConstraint& c, int d) { line(d, "not_empty " + c.view); }

    void query(const Query& q, int d) {
        line(d, q.distinct ? "Query distinct" : "Query");
        line(d + 1, "select");
        for (const auto& item : q.items) {
            expr(item.expr, d + 2);
            if (item.alias) line(d + 3, "as " + *item.alias);
        }
        if (!q.from.empty()) {
            line(d + 1, "from");
            for (const auto& f : q.from) from_item(f, d + 2);
        }
        clause(q.where, "where", d + 1);
        if (!q.group_by.empty()) {
            line(d + 1, "group_by");
            for (const auto& g : q.group_by) expr(g, d + 2);
        }
        clause(q.having, "having", d + 1);
        if (!q.order_by.empty()) {
            line(d + 1, "order_by");
            for (const auto& o : q.order_by) {
                expr(o.expr, d + 2);
                if (o.descending) line(d + 3, "desc");
            }
        }
        clause(q.limit, "limit", d + 1);
        clause(q.offset, "offset", d + 1);
    }

    void clause(const std::optional<Expr>& e, const char* label, int d) {
        if (!e) return;
        line(d, label);
        expr(*e, d + 1);
    }

    void from_item(const FromItem& f, int d) {
        static const char* kJoin[] = {"", "Comma ", "Join ", "LeftJoin ", "CrossJoin "};
        std::string prefix = kJoin[static_cast<int>(f.join)];
        if (auto* t = std::get_if<TableRef>(&f.source)) {
            std::string text = prefix + "TableRef " + t->relation;
            if (t->alias) text += " as " + *t->alias;
            if (t->latest) text += " LATEST";
            if (t->latest_request) text += " LATEST_REQUEST";
            line(d, text);
        } else {
            const auto& dt = std::get<DerivedTable>(f.source);
            line(d, prefix + "Derived as " + dt.alias);
            query(*dt.query, d + 1);
        }
        if (f.on) {
            line(d + 1, "on");
            expr(*f.on, d + 2);
        }
    }

    void expr(const Expr& e, int d) {
        std::visit([&](const auto& n) { node(n, d); }, e.node);
    }

    void node(const Literal& l, int d) {
        std::string kind = is_null(l.value)                               ? "Null"
                           : std::holds_alternative<std::int64_t>(l.value) ? "Int"
                           : std::holds_alternative<double>(l.value)       ? "Real"
                                                                           : "Text";
        line(d, "Literal " + kind + " " + Printer(PrintMode::Dialect).expr(Expr{l}));
    }
    void node(const ColumnRef& c, int d) {
        line(d, "ColumnRef " + (c.qualifier ? *c.qualifier + "." : std::string()) + c.name);
    }
    void node(const Star& s, int d) {
        line(d, "Star" + (s.qualifier ? " " + *s.qualifier : std::string()));
    }
    void node(const Unary& u, int d) {
        static const char* kOps[] = {"Neg", "Plus", "Not"};
        line(d, std::string("Unary ") + kOps[static_cast<int>(u.op)]);
        expr(*u.operand, d + 1);
    }
    void node(const Binary& b, int d) {
        line(d, std::string("Binary ") + binary_text(b.op));
        expr(*b.lhs, d + 1);
        expr(*b.rhs, d + 1);
    }
    void node(const Between& b, int d) {
        line(d, b.negated ? "NotBetween" : "Between");
        expr(*b.operand, d + 1);
        expr(*b.low, d + 1);
        expr(*b.high, d + 1);
    }
    void node(const InList& in, int d) {
        line(d, in.negated ? "NotInList" : "InList");
        expr(*in.operand, d + 1);
        for (const auto& i : in.items) expr(i, d + 1);
    }
    void node(const InSubquery& in, int d) {
        line(d, in.negated ? "NotInSubquery" : "InSubquery");
        expr(*in.operand, d + 1);
        query(*in.query, d + 1);
    }
    void node(const FuncCall& f, int d) {
        line(d, "FuncCall " + f.name + (f.distinct ? " distinct" : ""));
        for (const auto& a : f.args) expr(a, d + 1);
    }
    void node(const Case& c, int d) {
        line(d, "Case");
        if (c.operand) {
            line(d + 1, "operand");
            expr(**c.operand, d + 2);
        }
        for (const auto& w : c.whens) {
            line(d + 1, "when");
            expr(w.when, d + 2);
            line(d + 1, "then");
            expr(w.then, d + 2);
        }
        if (c.otherwise) {
            line(d + 1, "else");
            expr(**c.otherwise, d + 2);
        }
    }
    void node(const Subquery& s, int d) {
        line(d, "Subquery");
        query(*s.query, d + 1);
    }
    void node(const Exists& e, int d) {
        line(d, "Exists");
        query(*e.query, d + 1);
    }

    std::ostringstream out_;
};

}  // namespace

std::string dump_ast(const std::vector<Statement>& stmts) {
    Dumper d;
    for (const auto& s : stmts) d.statement(s);
    return d.str();
}

}  // namespace diel
