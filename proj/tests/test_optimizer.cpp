// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace diel;
using namespace diel::testing;
using nlohmann::json;

namespace {

CompiledProgram compile_text(const std::string& text) {
    return compile(parse_diel(text), CompileOptions{listing_externals()});
}

std::vector<std::vector<Row>> row_sets(const Session& s) {
    std::vector<std::vector<Row>> out;
    for (const auto& f : s.frames()) out.push_back(f.rows);
    return out;
}

const char* kShared =
    "CREATE EVENT TABLE originSelItx(origin TEXT);\n"
    "CREATE EVENT TABLE minDelayItx(d INT);\n"
    "CREATE VIEW filteredFlights AS SELECT flights.* FROM flights JOIN LATEST originSelItx o ON flights.origin = o.origin;\n"
    "CREATE VIEW lonely AS SELECT year FROM flights WHERE delay > 100;\n"
    "CREATE OUTPUT byYear AS SELECT year, COUNT() AS n FROM filteredFlights GROUP BY year;\n"
    "CREATE OUTPUT late AS SELECT f.destination, f.delay FROM filteredFlights f JOIN LATEST minDelayItx m "
    "ON f.delay >= m.d ORDER BY f.delay DESC, f.destination;\n"
    "CREATE OUTPUT lonelyCount AS SELECT COUNT() AS n FROM lonely;\n";

}  // namespace

TEST_CASE("request cache basics") {
    RequestCache c;
    json p2000 = {{"slideItx", json::array({json::array({2000})})}};
    json p1999 = {{"slideItx", json::array({json::array({1999})})}};
    CHECK_FALSE(c.lookup("v", p2000));
    CHECK(c.misses() == 1);
    std::vector<Row> rows{{std::string("BOS"), std::int64_t{3}}};
    CHECK(c.store("v", p2000, rows) == 1);
    auto hit = c.lookup("v", p2000);
    REQUIRE(hit);
    CHECK(*hit == 1);
    CHECK(c.rows(*hit) == rows);
    CHECK(c.hits() == 1);

    // Identical rows for other parameters share the data id.
    CHECK(c.store("v", p1999, rows) == 1);
    CHECK(c.entries().size() == 2);
    CHECK(c.stored_row_sets() == 1);
    CHECK(c.entries()[0].hash != c.entries()[1].hash);
    CHECK(c.entries()[1].view_name == "v");

    // Zero rows are cached like anything else.
    CHECK(c.store("w", p2000, {}) == 2);
    REQUIRE(c.lookup("w", p2000));
    CHECK(c.rows(2).empty());

    CHECK(RequestCache::key("v", p2000) == RequestCache::key("v", p2000));
    CHECK(RequestCache::key("v", p2000) != RequestCache::key("w", p2000));
    CHECK(RequestCache::key("v", p2000).size() == 16);
    CHECK_THROWS_AS(c.rows(99), Error);
}

TEST_CASE("store dedup agrees with a row-set equality oracle") {
    std::mt19937 rng(6);
    RequestCache c;
    std::vector<std::vector<Row>> distinct;
    for (int i = 0; i < 300; ++i) {
        std::vector<Row> rows;
        for (int k = 0; k < static_cast<int>(rng() % 3); ++k) rows.push_back({std::int64_t(rng() % 2), std::string(1, char('a' + rng() % 2))});
        auto id = c.store("v", json{{"i", i}}, rows);
        auto it = std::find(distinct.begin(), distinct.end(), rows);
        if (it == distinct.end()) {
            distinct.push_back(rows);
            CHECK(id == static_cast<std::int64_t>(distinct.size()));
        } else {
            CHECK(id == it - distinct.begin() + 1);
        }
    }
    CHECK(c.stored_row_sets() == distinct.size());
    CHECK(c.entries().size() == 300);
}

TEST_CASE("which async views are cacheable") {
    CHECK(is_cacheable("distDataEvent", compile_text(listing_text("slider_async")).catalog));
    CHECK(is_cacheable("distDataEvent", compile_text(listing_text("newer_only")).catalog));
    CHECK_FALSE(is_cacheable("distData", compile_text(listing_text("slider_async")).catalog));
    auto cacheable = [](const std::string& body) {
        return is_cacheable("av", compile_text("CREATE EVENT TABLE p(v INT);\nCREATE ASYNC VIEW av AS " + body + ";").catalog);
    };
    CHECK(cacheable("SELECT year FROM flights JOIN LATEST p ON year = v"));
    CHECK_FALSE(cacheable("SELECT COUNT() FROM p"));
    CHECK_FALSE(cacheable("SELECT year FROM flights"));
    CHECK_FALSE(cacheable("SELECT year FROM flights JOIN LATEST p ON year = v ORDER BY RANDOM() LIMIT 3"));
    CHECK_FALSE(cacheable("SELECT timestep FROM LATEST p"));
    CHECK_FALSE(cacheable("SELECT * FROM LATEST p"));
    CHECK_FALSE(cacheable("SELECT year FROM flights WHERE year > (SELECT MAX(v) FROM p)"));
}

TEST_CASE("repeated parameters skip the leader") {
    auto flights = flight_rows();
    auto run = [&](bool cache) {
        RuntimeOptions o;
        o.cache = cache;
        auto s = open_session(listing_text("slider"), remote_connections(flights_db(flights), LatencySpec::fixed(50)), o);
        for (int i = 0; i < 10; ++i) s->new_event("slideItx", {{"flight_year", 2000}}, i * 100);
        s->run_until_quiescent();
        return s;
    };
    auto on = run(true);
    auto off = run(false);
    CHECK(on->federation().remote_message_count(MessageKind::EvalRequest) == 1);
    CHECK(off->federation().remote_message_count(MessageKind::EvalRequest) == 10);
    CHECK(on->federation().remote_message_count() < off->federation().remote_message_count());
    CHECK(on->stats().cache_hits == 9);
    CHECK(on->stats().cache_misses == 1);
    CHECK(on->cache().entries().size() == 1);
    CHECK(row_sets(*on) == row_sets(*off));
    CHECK(on->clock() == off->clock());
}

TEST_CASE("hit count equals repeated (view, params) pairs") {
    std::mt19937 rng(10);
    auto flights = flight_rows();
    for (int trial = 0; trial < 20; ++trial) {
        auto s = open_session(listing_text("slider"), remote_connections(flights_db(flights), LatencySpec::fixed(20)));
        std::set<int> seen;
        std::size_t repeats = 0;
        for (int i = 0; i < 12; ++i) {
            int y = 1997 + static_cast<int>(rng() % 4);
            if (!seen.insert(y).second) ++repeats;
            s->new_event("slideItx", {{"flight_year", y}}, i * 50);
        }
        s->run_until_quiescent();
        CHECK(s->stats().cache_hits == repeats);
        CHECK(s->federation().remote_message_count(MessageKind::EvalRequest) == seen.size());
    }
}

TEST_CASE("a warmed cache answers without remote traffic") {
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::fixed(30)));
    s->new_event("slideItx", {{"flight_year", 1999}}, 0);
    s->run_until_quiescent();
    auto before = s->federation().remote_message_count();
    for (int i = 1; i <= 5; ++i) s->new_event("slideItx", {{"flight_year", 1999}}, i * 100);
    CHECK(s->run_until_quiescent() == 500);
    CHECK(s->federation().remote_message_count() == before);
    CHECK(s->clock() == 12);
}

TEST_CASE("shared views are materialized, single-use views are not") {
    auto prog = compile_text(kShared);
    auto result = materialize_shared_views(prog.catalog, prog.graph);
    CHECK(result.plan.views == std::vector<std::string>{"filteredFlights"});
    CHECK(result.catalog.at("filteredFlights").materialized);
    CHECK_FALSE(result.catalog.at("lonely").materialized);
    auto deps = result.plan.refresh_deps.at("filteredFlights");
    std::sort(deps.begin(), deps.end());
    CHECK(deps == std::vector<std::string>{"flights", "originSelItx"});

    auto random = compile_text(
        "CREATE EVENT TABLE p(v INT);\n"
        "CREATE VIEW pick AS SELECT year FROM flights ORDER BY RANDOM() LIMIT 3;\n"
        "CREATE OUTPUT a AS SELECT * FROM pick;\nCREATE OUTPUT b AS SELECT COUNT() AS n FROM pick;\n");
    CHECK(materialize_shared_views(random.catalog, random.graph).plan.views.empty());
}

TEST_CASE("materialization leaves frames unchanged") {
    auto flights = flight_rows(80, 3);
    std::mt19937 rng(44);
    for (int trial = 0; trial < 15; ++trial) {
        std::vector<std::pair<std::string, json>> trace;
        const char* origins[] = {"BOS", "JFK", "LAX", "ORD", "SFO"};
        for (int i = 0; i < 12; ++i) {
            if (rng() % 2) trace.push_back({"originSelItx", {{"origin", origins[rng() % 5]}}});
            else trace.push_back({"minDelayItx", {{"d", static_cast<int>(rng() % 100)}}});
        }
        auto run = [&](bool materialize) {
            RuntimeOptions o;
            o.materialize = materialize;
            auto s = open_session(kShared, local_connections(flights_db(flights)), o);
            for (std::size_t i = 0; i < trace.size(); ++i) s->new_event(trace[i].first, trace[i].second, i);
            std::string log;
            for (const auto& f : s->frames()) log += frame_to_json(f).dump() + "\n";
            return std::make_pair(log, s->stats().materialized_views);
        };
        auto on = run(true);
        auto off = run(false);
        CHECK(on.second == 1);
        CHECK(off.second == 0);
        CHECK(on.first == off.first);
    }
}

TEST_CASE("materialized view is a table at the coordinator") {
    auto s = open_session(kShared, local_connections(flights_db(flight_rows())));
    auto rs = s->coordinator_db().query("SELECT type FROM sqlite_master WHERE name = 'filteredFlights'");
    REQUIRE(rs.rows.size() == 1);
    CHECK(std::get<std::string>(rs.rows[0][0]) == "table");
    s->new_event("originSelItx", {{"origin", "BOS"}}, 0);
    auto n = s->coordinator_db().query("SELECT COUNT(*) FROM filteredFlights WHERE origin <> 'BOS'");
    CHECK(std::get<std::int64_t>(n.rows[0][0]) == 0);
}
