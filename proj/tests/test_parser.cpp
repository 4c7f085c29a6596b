// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <random>

#include "diel/parser.hpp"
#include "support.hpp"

using namespace diel;
using diel::testing::listing_names;
using diel::testing::listing_text;

namespace {

const Query& view_query(const Statement& s) { return std::get<Query>(s.body); }

const TableRef& table_at(const Query& q, std::size_t i) {
    return std::get<TableRef>(q.from.at(i).source);
}

/// Code of the error raised while parsing `src`; nullopt when it parses.
std::optional<ErrorCode> parse_error_code(std::string_view src) {
    try {
        parse_diel(src);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

bool contains_subquery_over_latest(const Expr& e, const std::string& rel) {
    bool found = false;
    for_each_expr(e, [&](const Expr& node) {
        if (!node.is<Subquery>()) return;
        for_each_table_ref(*node.as<Subquery>().query, [&](const TableRef& t) {
            if (t.relation == rel && t.latest) found = true;
        });
    });
    return found;
}

}  // namespace

TEST_CASE("single event table with one typed column") {
    auto stmts = parse_diel("CREATE EVENT TABLE slideItx(flight_year INT);");
    REQUIRE(stmts.size() == 1);
    CHECK(stmts[0].kind == StatementKind::CreateEventTable);
    CHECK(stmts[0].name == "slideItx");
    const auto& cols = std::get<std::vector<ColumnDef>>(stmts[0].body);
    REQUIRE(cols.size() == 1);
    CHECK(cols[0].name == "flight_year");
    CHECK(cols[0].type == ColumnType::Int);
    CHECK_FALSE(cols[0].check.has_value());
}

TEST_CASE("empty and comment-only input yield no statements") {
    CHECK(parse_diel("").empty());
    CHECK(parse_diel("  -- nothing here\n\n").empty());
}

TEST_CASE("multi-select listing") {
    auto stmts = parse_diel(listing_text("multi_select"));
    REQUIRE(stmts.size() == 3);
    CHECK(stmts[0].kind == StatementKind::CreateEventTable);
    CHECK(stmts[0].name == "resetItx");
    CHECK(std::get<std::vector<ColumnDef>>(stmts[0].body).empty());
    CHECK(stmts[1].kind == StatementKind::CreateEventTable);
    const auto& click = std::get<std::vector<ColumnDef>>(stmts[1].body);
    REQUIRE(click.size() == 1);
    CHECK(click[0].name == "tweetId");
    CHECK(click[0].type == ColumnType::Text);
    REQUIRE(stmts[2].kind == StatementKind::CreateView);
    const auto& q = view_query(stmts[2]);
    REQUIRE(q.where.has_value());
    CHECK(contains_subquery_over_latest(*q.where, "resetItx"));
}

TEST_CASE("parse_query entry point") {
    SUBCASE("latest star select") {
        auto q = parse_query("SELECT * FROM LATEST brushItx");
        REQUIRE(q.from.size() == 1);
        CHECK(table_at(q, 0).relation == "brushItx");
        CHECK(table_at(q, 0).latest);
        CHECK_FALSE(table_at(q, 0).latest_request);
        REQUIRE(q.items.size() == 1);
        CHECK(q.items[0].expr.is<Star>());
    }
    SUBCASE("constant select") {
        auto q = parse_query("SELECT 1");
        CHECK(q.from.empty());
        REQUIRE(q.items.size() == 1);
        CHECK(q.items[0].expr == Expr(Literal{std::int64_t{1}}));
    }
    SUBCASE("two latest references joined on timestep") {
        auto q = parse_query(
            "SELECT b.* FROM LATEST brushItx b JOIN LATEST mapItx m ON b.timestep > m.timestep");
        REQUIRE(q.from.size() == 2);
        CHECK(table_at(q, 0).latest);
        CHECK(table_at(q, 1).latest);
        CHECK(table_at(q, 0).visible_name() == "b");
        CHECK(table_at(q, 1).visible_name() == "m");
        REQUIRE(q.from[1].on.has_value());
        CHECK(*q.from[1].on == parse_expr("b.timestep > m.timestep"));
        CHECK(print_expr(*q.from[1].on) == "b.timestep > m.timestep");
    }
    SUBCASE("matches the body of an equivalent view") {
        for (const auto& name : listing_names()) {
            for (const auto& s : parse_diel(listing_text(name))) {
                if (s.kind != StatementKind::CreateView && s.kind != StatementKind::CreateOutput &&
                    s.kind != StatementKind::CreateAsyncView)
                    continue;
                const auto* q = std::get_if<Query>(&s.body);
                if (!q) continue;
                CAPTURE(name);
                CAPTURE(s.name);
                CHECK(parse_query(print_query(*q)) == *q);
            }
        }
    }
}

TEST_CASE("latest request modifier") {
    auto q = parse_query("SELECT * FROM LATEST_REQUEST distDataEvent e");
    CHECK(table_at(q, 0).latest_request);
    CHECK_FALSE(table_at(q, 0).latest);
    CHECK(table_at(q, 0).alias == std::optional<std::string>("e"));
}

TEST_CASE("column CHECK without parentheses") {
    auto stmts = parse_diel("CREATE EVENT TABLE sampleSizeItx (size INT CHECK size > 0);");
    const auto& cols = std::get<std::vector<ColumnDef>>(stmts.at(0).body);
    REQUIRE(cols.at(0).check.has_value());
    CHECK(*cols[0].check == parse_expr("size > 0"));
}

TEST_CASE("statement spans cover the terminating semicolon") {
    for (const auto& name : listing_names()) {
        std::string text = listing_text(name);
        CAPTURE(name);
        for (const auto& s : parse_diel(text)) {
            REQUIRE(s.span.end.offset <= text.size());
            REQUIRE(s.span.begin.offset < s.span.end.offset);
            CHECK(text[s.span.end.offset - 1] == ';');
            if (s.kind != StatementKind::InsertStatement) CHECK_FALSE(s.name.empty());
        }
    }
}

TEST_CASE("every listing round-trips through the printer") {
    for (const auto& name : listing_names()) {
        CAPTURE(name);
        auto first = parse_diel(listing_text(name));
        REQUIRE_FALSE(first.empty());
        std::string printed = print_program(first);
        auto second = parse_diel(printed);
        CHECK(second == first);
        CHECK(print_program(second) == printed);
    }
}

TEST_CASE("listing ASTs match golden snapshots") {
    namespace fs = std::filesystem;
    fs::path dir = diel::testing::source_path("tests/golden");
    for (const auto& name : listing_names()) {
        CAPTURE(name);
        std::string dump = dump_ast(parse_diel(listing_text(name)));
        fs::path file = dir / (name + ".ast");
        if (diel::testing::regen_golden()) {
            fs::create_directories(dir);
            diel::testing::write_file(file.string(), dump);
            continue;
        }
        REQUIRE_MESSAGE(fs::exists(file), "missing snapshot; set DIEL_UPDATE_GOLDEN=1");
        CHECK(dump == diel::testing::read_file(file.string()));
    }
}

TEST_CASE("syntax errors carry position and expected tokens") {
    std::string src = "CREATE EVENT TABLE a (x INT);\nCREATE VIEW v AS SELECT x FROM a WHERE;";
    try {
        parse_diel(src);
        FAIL("no error");
    } catch (const SyntaxError& e) {
        CHECK(e.code() == ErrorCode::SyntaxError);
        CHECK(e.pos().line == 2);
        CHECK(e.pos().column == 39);
        CHECK(e.pos().offset <= src.size());
        CHECK_FALSE(e.expected().empty());
    }
}

TEST_CASE("malformed and rejected forms") {
    CHECK(parse_error_code("CREATE GADGET x (a INT);") == ErrorCode::UnknownKeyword);
    CHECK(parse_error_code("CREATE EVENT VIEW x AS SELECT 1;") == ErrorCode::UnknownKeyword);
    CHECK(parse_error_code("CREATE TABLE t AS SELECT 1;") == ErrorCode::SyntaxError);
    CHECK(parse_error_code("INSERT INTO t SELECT 1;") == ErrorCode::SyntaxError);
    CHECK(parse_error_code("CREATE VIEW v AS SELECT 1") == ErrorCode::SyntaxError);
    CHECK(parse_error_code("CREATE VIEW v AS SELECT 1; garbage") == ErrorCode::SyntaxError);
    CHECK(parse_error_code("CREATE VIEW v AS SELECT a FROM LATEST LATEST_REQUEST t;") ==
          ErrorCode::SyntaxError);
    CHECK(parse_error_code(
              "CREATE VIEW v AS SELECT * FROM t LIMIT (SELECT size FROM CREATE LATEST s);") ==
          ErrorCode::SyntaxError);
}

TEST_CASE("schema copy into plain and event tables") {
    auto stmts = parse_diel("CREATE EVENT TABLE mapItx AS brushItx; CREATE TABLE log AS mapItx;");
    REQUIRE(stmts.size() == 2);
    CHECK(stmts[0].kind == StatementKind::CreateTableAsSchemaCopy);
    CHECK(stmts[0].copy_into_event_table);
    CHECK(std::get<SchemaCopy>(stmts[0].body).source == "brushItx");
    CHECK(stmts[1].kind == StatementKind::CreateTableAsSchemaCopy);
    CHECK_FALSE(stmts[1].copy_into_event_table);
}

TEST_CASE("templates, programs and constraints") {
    auto stmts = parse_diel(listing_text("extensions"));
    bool saw_template = false, saw_use = false, saw_program = false, saw_constraint = false;
    for (const auto& s : stmts) {
        if (s.kind == StatementKind::CreateTemplate) {
            saw_template = true;
            CHECK_FALSE(std::get<TemplateDef>(s.body).params.empty());
        }
        if (std::holds_alternative<TemplateUse>(s.body)) saw_use = true;
        if (s.kind == StatementKind::CreateProgram) {
            saw_program = true;
            CHECK_FALSE(std::get<ProgramBody>(s.body).triggers.empty());
        }
        if (s.kind == StatementKind::Constraint) {
            saw_constraint = true;
            CHECK(std::get<ViewConstraint>(s.body).kind == ConstraintKind::NotEmpty);
        }
    }
    CHECK(saw_template);
    CHECK(saw_use);
    CHECK(saw_program);
    CHECK(saw_constraint);
}

TEST_CASE("unnamed program gets a name derived from its triggers") {
    auto stmts = parse_diel(
        "CREATE PROGRAM AFTER (clickItx, resetItx) BEGIN INSERT INTO h SELECT 1; END;");
    REQUIRE(stmts.size() == 1);
    CHECK(stmts[0].name == "after_clickItx_resetItx");
    const auto& body = std::get<ProgramBody>(stmts[0].body);
    CHECK(body.triggers == std::vector<std::string>{"clickItx", "resetItx"});
    CHECK(body.commands.size() == 1);
}

TEST_CASE("dialect keywords never collide with quoted identifiers") {
    const char* words[] = {"EVENT",   "ASYNC",    "OUTPUT",  "LATEST", "LATEST_REQUEST",
                           "TEMPLATE", "PROGRAM", "USE",     "AFTER",  "SELECT", "TABLE"};
    for (const char* w : words) {
        CAPTURE(w);
        std::string q = std::string("\"") + w + "\"";
        std::string src = "CREATE EVENT TABLE " + q + " (" + q + " INT);\n" +
                          "CREATE VIEW v AS SELECT " + q + "." + q + " FROM LATEST " + q + ";";
        auto stmts = parse_diel(src);
        REQUIRE(stmts.size() == 2);
        CHECK(stmts[0].name == w);
        CHECK(std::get<std::vector<ColumnDef>>(stmts[0].body).at(0).name == w);
        const auto& query = view_query(stmts[1]);
        CHECK(table_at(query, 0).relation == w);
        CHECK(table_at(query, 0).latest);
        CHECK(query.items.at(0).expr == Expr(ColumnRef{std::string(w), w}));
        CHECK(parse_diel(print_program(stmts)) == stmts);
    }
}

// ── properties ─────────────────────────────────────────────────

namespace {

class ExprGen {
public:
    explicit ExprGen(std::uint64_t seed) : rng_(seed) {}

    Expr expr(int depth) {
        if (depth <= 0) return leaf();
        switch (pick(9)) {
        case 0: return leaf();
        case 1: {
            static const BinaryOp ops[] = {
                BinaryOp::Or,  BinaryOp::And, BinaryOp::Eq,  BinaryOp::Ne,   BinaryOp::Is,
                BinaryOp::IsNot, BinaryOp::Like, BinaryOp::NotLike, BinaryOp::Lt, BinaryOp::Le,
                BinaryOp::Gt,  BinaryOp::Ge,  BinaryOp::Add, BinaryOp::Sub,  BinaryOp::Mul,
                BinaryOp::Div, BinaryOp::Mod, BinaryOp::Concat};
            return Binary{ops[pick(std::size(ops))], expr(depth - 1), expr(depth - 1)};
        }
        case 2: return Unary{pick(2) ? UnaryOp::Not : UnaryOp::Neg, column()};
        case 3: return Between{expr(depth - 1), expr(depth - 1), expr(depth - 1), pick(2) == 1};
        case 4: {
            InList in{expr(depth - 1), {}, pick(2) == 1};
            for (std::size_t i = 0, n = 1 + pick(3); i < n; ++i) in.items.push_back(leaf());
            return in;
        }
        case 5: {
            static const char* fns[] = {"COALESCE", "MAX", "MIN", "ABS", "point_in_box"};
            FuncCall f{fns[pick(std::size(fns))], {}, false};
            for (std::size_t i = 0, n = 1 + pick(3); i < n; ++i) f.args.push_back(expr(depth - 1));
            return f;
        }
        case 6: {
            Case c;
            if (pick(2)) c.operand = Box<Expr>(column());
            for (std::size_t i = 0, n = 1 + pick(2); i < n; ++i)
                c.whens.push_back(CaseWhen{expr(depth - 1), expr(depth - 1)});
            if (pick(2)) c.otherwise = Box<Expr>(leaf());
            return c;
        }
        case 7: return Subquery{query(depth - 1)};
        default: return InSubquery{column(), query(depth - 1), pick(2) == 1};
        }
    }

    Query query(int depth) {
        Query q;
        q.items.push_back(SelectItem{expr(depth - 1), std::nullopt});
        TableRef t{rel(), std::nullopt, false, false};
        switch (pick(3)) {
        case 0: t.latest = true; break;
        case 1: t.latest_request = true; break;
        default: break;
        }
        if (pick(2)) t.alias = "a" + std::to_string(pick(3));
        q.from.push_back(FromItem{JoinKind::First, t, std::nullopt});
        if (pick(2)) q.where = expr(depth - 1);
        if (pick(3) == 0) q.order_by.push_back(OrderItem{column(), pick(2) == 1});
        if (pick(3) == 0) q.limit = Expr(Literal{std::int64_t(pick(10))});
        return q;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    std::string rel() {
        static const char* names[] = {"slideItx", "flights", "brushItx", "t1"};
        return names[pick(std::size(names))];
    }

    Expr column() {
        static const char* names[] = {"year", "delay", "timestep", "origin", "x"};
        std::optional<std::string> qual;
        if (pick(2)) qual = rel();
        return ColumnRef{qual, names[pick(std::size(names))]};
    }

    Expr leaf() {
        switch (pick(5)) {
        case 0: return Literal{std::int64_t(pick(1000))};
        case 1: return Literal{double(pick(400)) / 8.0};
        case 2: {
            static const char* strs[] = {"", "a", "it's", "JFK", "--x"};
            return Literal{std::string(strs[pick(std::size(strs))])};
        }
        case 3: return Literal{std::monostate{}};
        default: return column();
        }
    }

    std::mt19937_64 rng_;
};

}  // namespace

TEST_CASE("random expressions round-trip through the printer") {
    int checked = 0;
    for (std::uint64_t seed = 1; seed <= 1500; ++seed) {
        ExprGen gen(seed);
        Expr e = gen.expr(4);
        std::string text = print_expr(e);
        CAPTURE(seed);
        CAPTURE(text);
        REQUIRE(parse_expr(text) == e);
        ++checked;
    }
    CHECK(checked == 1500);
}

TEST_CASE("random queries round-trip through view statements") {
    for (std::uint64_t seed = 1; seed <= 500; ++seed) {
        ExprGen gen(seed * 7919);
        Query q = gen.query(3);
        std::string src = "CREATE VIEW v AS " + print_query(q) + ";";
        CAPTURE(src);
        auto stmts = parse_diel(src);
        REQUIRE(stmts.size() == 1);
        REQUIRE(view_query(stmts[0]) == q);
        REQUIRE(parse_query(print_query(q)) == q);
    }
}

TEST_CASE("reported error positions lie within the input") {
    std::mt19937_64 rng(20260);
    const std::string alphabet = "();,.'\"*=<>-+ \nabcSELECTFROMLATEST01";
    int errors = 0;
    for (int i = 0; i < 800; ++i) {
        const auto& names = listing_names();
        std::string text = listing_text(names[i % names.size()]);
        int edits = 1 + int(rng() % 4);
        for (int k = 0; k < edits && !text.empty(); ++k) {
            std::size_t at = rng() % text.size();
            switch (rng() % 3) {
            case 0: text.erase(at, 1 + rng() % 6); break;
            case 1: text.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
            default: text.resize(at); break;
            }
        }
        try {
            parse_diel(text);
        } catch (const SyntaxError& e) {
            ++errors;
            CAPTURE(text);
            REQUIRE(e.pos().offset <= text.size());
            REQUIRE(e.pos().line >= 1);
            REQUIRE(e.pos().column >= 1);
        }
    }
    CHECK(errors > 100);
}
