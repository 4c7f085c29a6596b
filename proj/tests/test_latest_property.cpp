// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <random>

#include "latest_fixture.hpp"

using namespace diel;
using namespace diel::testing;

TEST_CASE("desugared LATEST matches nested-loop evaluation") {
    const auto& views = latest_fixture_views();
    int cases = 0;
    for (std::uint64_t seed = 1; seed <= 240; ++seed) {
        LatestFixture fx(seed);
        for (const auto& v : views) {
            CAPTURE(seed);
            CAPTURE(v);
            REQUIRE(fx.engine(v) == fx.oracle(v));
            ++cases;
        }
    }
    CHECK(cases >= 1000);
}

TEST_CASE("LATEST over an empty relation yields nothing") {
    LatestFixture fx(0);
    Database db;
    for (const auto& rel : fx.program().catalog.relations())
        if (!rel.is_query_backed() || rel.kind == RelationKind::AsyncView)
            db.exec(create_table_sql(rel));
    db.insert_rows("items", {"k", "label"}, {{std::int64_t(1), std::string("a")}});
    for (const char* v : {"afterMap", "latestClick", "sinceReset", "latestResp"})
        CHECK(db.query(relation_query_sql(fx.program().catalog.at(v))).rows.empty());
    // LEFT JOIN keeps the outer row with NULLs.
    auto rows = db.query(relation_query_sql(fx.program().catalog.at("labelled"))).rows;
    REQUIRE(rows.size() == 1);
    CHECK(is_null(rows[0][1]));
}
