// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <map>
#include <random>

#include "support.hpp"

using namespace diel;
using namespace diel::testing;
using nlohmann::json;

namespace {

Message sample_message() {
    Message m;
    m.kind = MessageKind::ResultRows;
    m.from = "remote";
    m.to = "main";
    m.view = "distDataEvent";
    m.rows = {{std::string("BOS"), std::int64_t{3}}, {std::monostate{}, 1.25}};
    m.request_timestep = 3;
    m.send_ms = 10;
    m.deliver_ms = 510;
    m.seq = 2;
    return m;
}

std::optional<ErrorCode> decode_error(std::string_view bytes) {
    try {
        decode_frames(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    return std::nullopt;
}

std::map<std::int64_t, std::vector<Row>> oracle_by_year(const std::vector<FlightRow>& flights) {
    std::map<std::int64_t, std::vector<Row>> out;
    std::map<std::int64_t, std::map<std::string, std::int64_t>> counts;
    for (const auto& f : flights) ++counts[f.year][f.origin];
    for (const auto& [y, m] : counts)
        for (const auto& [o, n] : m) out[y].push_back({o, n});
    return out;
}

}  // namespace

TEST_CASE("message JSON uses the exact field names") {
    auto j = message_to_json(sample_message());
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"kind", "from", "to", "view", "rows", "request_timestep", "send_ms",
                                           "deliver_ms", "seq"});
    CHECK(j["kind"] == "ResultRows");

    Message ship;
    ship.kind = MessageKind::ShipData;
    ship.relation = "slideItx";
    auto js = message_to_json(ship);
    CHECK(js.contains("relation"));
    CHECK_FALSE(js.contains("view"));
    Message eval;
    eval.kind = MessageKind::EvalRequest;
    auto je = message_to_json(eval);
    CHECK(je.contains("view"));
    CHECK_FALSE(je.contains("rows"));
}

TEST_CASE("frames round-trip") {
    std::mt19937 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Message> msgs;
        std::string bytes;
        for (int i = 0; i < 1 + static_cast<int>(rng() % 4); ++i) {
            Message m = sample_message();
            m.kind = static_cast<MessageKind>(rng() % 4);
            m.request_timestep = rng() % 100;
            m.send_ms = rng() % 1000;
            m.deliver_ms = m.send_ms + rng() % 1000;
            m.seq = 1 + rng() % 9;
            if (m.kind != MessageKind::EvalRequest && m.kind != MessageKind::ResultRows) m.view.clear();
            if (m.kind != MessageKind::ShipData && m.kind != MessageKind::ResultRows) m.rows.clear();
            if (m.kind == MessageKind::ShipData) m.relation = "slideItx";
            if (m.kind == MessageKind::SetupProgram) m.sql = "CREATE TABLE t (x INTEGER);";
            msgs.push_back(m);
            bytes += encode_frame(m);
        }
        CHECK(decode_frames(bytes) == msgs);
    }
}

TEST_CASE("frame decoding rejects damage") {
    std::string good = encode_frame(sample_message());
    CHECK(good.size() > 4);
    CHECK(static_cast<unsigned char>(good[0]) == 0);
    CHECK(decode_error(good.substr(0, 3)) == ErrorCode::WireFormatError);
    CHECK(decode_error(good.substr(0, good.size() - 1)) == ErrorCode::WireFormatError);
    std::string bad = good;
    bad[4] = '[';
    CHECK(decode_error(bad) == ErrorCode::WireFormatError);
    json j = message_to_json(sample_message());
    j["kind"] = "Telepathy";
    CHECK_THROWS_AS(message_from_json(j), Error);
    j = message_to_json(sample_message());
    j["deliver_ms"] = 1;
    CHECK_THROWS_AS(message_from_json(j), Error);
    j = message_to_json(sample_message());
    j.erase("send_ms");
    CHECK_THROWS_AS(message_from_json(j), Error);
    CHECK(decode_frames("").empty());
}

TEST_CASE("latency specs") {
    CHECK(parse_latency("fixed=5") == LatencySpec::fixed(5));
    CHECK(parse_latency("7") == LatencySpec::fixed(7));
    CHECK(parse_latency("uniform=10-20") == LatencySpec::uniform(10, 20));
    CHECK(parse_latency("script=500,100") == LatencySpec::scripted({500, 100}));
    for (const char* bad : {"fixed=-1", "uniform=20-10", "script=", "gauss=1", "fixed=x"})
        CHECK_THROWS_AS(parse_latency(bad), Error);
    for (const auto& spec : {LatencySpec::fixed(3), LatencySpec::uniform(1, 9), LatencySpec::scripted({4, 2})})
        CHECK(parse_latency(latency_to_string(spec)) == spec);

    LatencyModel a(LatencySpec::uniform(0, 1000), 9, "x->y");
    LatencyModel b(LatencySpec::uniform(0, 1000), 9, "x->y");
    LatencyModel c(LatencySpec::uniform(0, 1000), 9, "y->x");
    std::vector<std::int64_t> da, db, dc;
    for (int i = 0; i < 50; ++i) {
        da.push_back(a.sample());
        db.push_back(b.sample());
        dc.push_back(c.sample());
        CHECK(da.back() >= 0);
        CHECK(da.back() <= 1000);
    }
    CHECK(da == db);
    CHECK(da != dc);

    LatencyModel s(LatencySpec::scripted({500, 100}), 0, "");
    CHECK(s.sample() == 500);
    CHECK(s.sample() == 100);
    try {
        s.sample();
        FAIL("script should be exhausted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScriptExhausted);
    }
}

TEST_CASE("scripted delays reorder two responses") {
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::scripted({500, 100})), o);
    s->new_event("slideItx", {{"flight_year", 1998}}, 0);
    s->new_event("slideItx", {{"flight_year", 1999}}, 10);
    s->run_until_quiescent();
    std::vector<std::pair<std::int64_t, std::int64_t>> results;  // (deliver, request)
    for (const auto& m : s->federation().messages())
        if (m.kind == MessageKind::ResultRows) results.emplace_back(m.deliver_ms, m.request_timestep);
    CHECK(results == std::vector<std::pair<std::int64_t, std::int64_t>>{{500, 1}, {110, 2}});
    CHECK(s->event_log()[2].request_timestep == 2);
    CHECK(s->event_log()[2].timestamp == 110);
    CHECK(s->event_log()[3].request_timestep == 1);
}

TEST_CASE("responses after later requests were sent") {
    // A request every 300 ms against a 500 ms response time.
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::fixed(500)), o);
    for (int i = 0; i < 4; ++i) s->new_event("slideItx", {{"flight_year", 1997 + i}}, i * 300);
    s->run_until_quiescent();
    std::vector<std::int64_t> kinds;  // 0 = interaction, 1 = result
    for (const auto& r : s->event_log()) kinds.push_back(r.request_timestep ? 1 : 0);
    CHECK(kinds == std::vector<std::int64_t>{0, 0, 1, 0, 1, 0, 1, 1});
}

TEST_CASE("scripted latency runs out") {
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::scripted({100})), o);
    s->new_event("slideItx", {{"flight_year", 1998}}, 0);
    try {
        s->new_event("slideItx", {{"flight_year", 1999}}, 10);
        s->run_until_quiescent();
        FAIL("expected ScriptExhausted");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ScriptExhausted);
    }
}

TEST_CASE("instance queue applies each link in order") {
    InstanceQueue q;
    auto msg = [](std::string from, std::uint64_t seq, std::int64_t t) {
        Message m;
        m.kind = MessageKind::ShipData;
        m.from = std::move(from);
        m.seq = seq;
        m.request_timestep = t;
        return m;
    };
    q.push(msg("a", 3, 3));
    q.push(msg("a", 2, 2));
    CHECK_FALSE(q.pop_ready());
    q.push(msg("b", 1, 5));
    CHECK(q.pop_ready()->from == "b");
    q.push(msg("a", 1, 1));
    CHECK(q.pop_ready()->seq == 1);
    CHECK(q.pop_ready()->seq == 2);
    CHECK(q.pop_ready()->seq == 3);
    CHECK(q.empty());
}

TEST_CASE("eval waits for its shipment") {
    FederationPlan plan;
    Federation fed("main", 0);
    fed.add_instance("main", DbKind::InProcess, Database{}, {});
    Instance& r = fed.add_instance("remote", DbKind::Remote, Database{}, {});
    r.db().exec("CREATE TABLE e (v INTEGER, timestep INTEGER, timestamp INTEGER)");
    DbProgram p;
    p.named_queries["av"] = "SELECT v FROM e WHERE timestep = (SELECT MAX(timestep) FROM e)";
    r.install(p);

    Message ship;
    ship.kind = MessageKind::ShipData;
    ship.from = "main";
    ship.to = "remote";
    ship.relation = "e";
    ship.rows = {{std::int64_t{42}, std::int64_t{4}, std::int64_t{0}}};
    ship.request_timestep = 4;
    ship.seq = 1;
    Message eval;
    eval.kind = MessageKind::EvalRequest;
    eval.from = "main";
    eval.to = "remote";
    eval.view = "av";
    eval.request_timestep = 4;
    eval.seq = 2;

    r.queue().push(eval);
    CHECK(r.step(0).empty());
    r.queue().push(ship);
    auto out = r.step(0);
    REQUIRE(out.size() == 1);
    CHECK(out[0].kind == MessageKind::ResultRows);
    CHECK(out[0].to == "main");
    CHECK(out[0].request_timestep == 4);
    CHECK(out[0].rows == std::vector<Row>{{std::int64_t{42}}});
    CHECK(r.evaluated() == std::vector<std::int64_t>{4});
}

TEST_CASE("zero-latency request is quiescent after two deliveries") {
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider_async"), remote_connections(flights_db(flight_rows()), LatencySpec::fixed(0)), o);
    s->new_event("slideItx", {{"flight_year", 2000}}, 0);
    s->run_until_quiescent();
    CHECK(s->federation().idle());
    std::size_t deliveries = 0;
    for (const auto& m : s->federation().messages())
        if (m.kind != MessageKind::SetupProgram) ++deliveries;
    // ShipData, EvalRequest, ResultRows; the first two travel together.
    CHECK(deliveries == 3);
    CHECK(s->federation().remote_message_count(MessageKind::ResultRows) == 1);
    CHECK(s->clock() == 2);
}

TEST_CASE("in-flight responses drain in delivery order") {
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::scripted({300, 50, 700})), o);
    for (int i = 0; i < 3; ++i) s->new_event("slideItx", {{"flight_year", 1998 + i}}, i);
    CHECK(s->clock() == 3);
    auto end = s->run_until_quiescent();
    CHECK(end == 702);
    std::vector<std::int64_t> ts;
    for (const auto& r : s->event_log())
        if (r.request_timestep) ts.push_back(r.timestamp);
    CHECK(ts == std::vector<std::int64_t>{51, 300, 702});
}

TEST_CASE("deadline and stuck queues") {
    RuntimeOptions o;
    o.cache = false;
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::fixed(900)), o);
    s->new_event("slideItx", {{"flight_year", 1998}}, 0);
    try {
        s->run_until_quiescent(500);
        FAIL("expected DeadlineExceeded");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeadlineExceeded);
    }
    CHECK(s->run_until_quiescent() == 900);

    Message orphan;
    orphan.kind = MessageKind::ShipData;
    orphan.from = "ghost";
    orphan.seq = 2;
    s->federation().instance("remote").queue().push(orphan);
    try {
        s->run_until_quiescent();
        FAIL("expected DependencyTimeout");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DependencyTimeout);
    }
}

TEST_CASE("adversarial reordering: ascending evaluation, one result per request") {
    auto flights = flight_rows(60, 5);
    auto oracle = oracle_by_year(flights);
    std::mt19937 rng(2024);
    int schedules = 0;
    for (int trial = 0; trial < 520; ++trial) {
        RuntimeOptions o;
        o.cache = false;
        o.seed = trial;
        auto s = open_session(listing_text("slider"),
                              remote_connections(flights_db(flights), LatencySpec::uniform(0, 400)), o);
        s->federation().set_link_latency("main", "remote", LatencySpec::uniform(0, 400));
        int n = 2 + static_cast<int>(rng() % 7);
        std::int64_t at = 0;
        std::map<std::int64_t, std::int64_t> year_of;
        for (int i = 0; i < n; ++i) {
            at += rng() % 200;
            std::int64_t year = 1997 + static_cast<std::int64_t>(rng() % 5);
            auto t = s->new_event("slideItx", {{"flight_year", year}}, at);
            year_of[*t] = year;
        }
        s->run_until_quiescent();

        const auto& evaluated = s->federation().instance("remote").evaluated();
        CHECK(static_cast<int>(evaluated.size()) == n);
        for (std::size_t i = 1; i < evaluated.size(); ++i) CHECK(evaluated[i - 1] < evaluated[i]);

        std::map<std::int64_t, int> answers;
        for (const auto& rec : s->event_log()) {
            if (!rec.request_timestep) continue;
            ++answers[*rec.request_timestep];
            auto rows = rec.rows;
            std::sort(rows.begin(), rows.end(), row_less);
            CHECK(rows == oracle[year_of.at(*rec.request_timestep)]);
        }
        CHECK(answers.size() == year_of.size());
        for (const auto& [t, k] : answers) CHECK(k == 1);
        CHECK(s->federation().remote_message_count(MessageKind::EvalRequest) ==
              s->federation().remote_message_count(MessageKind::ResultRows));
        ++schedules;
    }
    CHECK(schedules >= 500);
}

TEST_CASE("delivery schedule is a function of trace, latency and seed") {
    auto run = [](std::uint64_t seed) {
        RuntimeOptions o;
        o.cache = false;
        o.seed = seed;
        auto s = open_session(listing_text("slider"),
                              remote_connections(flights_db(flight_rows()), LatencySpec::uniform(0, 300)), o);
        for (int i = 0; i < 6; ++i) s->new_event("slideItx", {{"flight_year", 1997 + i % 4}}, i * 40);
        s->run_until_quiescent();
        std::string log;
        for (const auto& m : s->federation().messages()) log += message_to_json(m).dump() + "\n";
        for (const auto& f : s->frames()) log += frame_to_json(f).dump() + "\n";
        return log;
    };
    CHECK(run(1) == run(1));
    CHECK(run(1) != run(2));
}

TEST_CASE("setup program and snapshots are logged but not counted as remote traffic") {
    auto s = open_session(listing_text("slider"), remote_connections(flights_db(flight_rows()), LatencySpec::fixed(5)));
    std::size_t setups = 0;
    for (const auto& m : s->federation().messages())
        if (m.kind == MessageKind::SetupProgram) ++setups;
    CHECK(setups == 2);
    CHECK(s->federation().remote_message_count() == 0);
}
