// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <random>

#include "diel/catalog.hpp"
#include "diel/parser.hpp"
#include "diel/runtime.hpp"

namespace diel::testing {

inline std::string source_path(const std::string& rel) {
    return std::string(DIEL_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline bool regen_golden() { return std::getenv("DIEL_UPDATE_GOLDEN") != nullptr; }

inline ColumnDef col(std::string name, ColumnType type) {
    return ColumnDef{std::move(name), type, std::nullopt};
}

/// Base tables the listing fixtures read, all on the coordinator.
inline std::vector<ExternalRelation> listing_externals(bool with_tweets = true) {
    using T = ColumnType;
    std::vector<ExternalRelation> out = {
        {"flights",
         {col("year", T::Int), col("origin", T::Text), col("destination", T::Text),
          col("delay", T::Int), col("distance", T::Int)},
         "main",
         50},
        {"countries",
         {col("country", T::Text), col("centroidLat", T::Real), col("centroidLon", T::Real)},
         "main",
         8},
        {"users", {col("id", T::Int), col("age", T::Int)}, "main", 10},
        {"follows", {col("uId", T::Int), col("followerId", T::Int)}, "main", 20},
    };
    if (with_tweets)
        out.push_back({"tweets",
                       {col("tId", T::Text), col("uId", T::Int), col("content", T::Text),
                        col("lat", T::Real), col("lon", T::Real)},
                       "main",
                       20});
    return out;
}

inline const std::vector<std::string>& listing_names() {
    static const std::vector<std::string> kNames = {
        "slider",        "slider_async",   "brush",        "multi_select",      "brush_map",
        "snapped_brush", "brushed_countries", "scroll",    "reorder",           "sample_size",
        "pan",           "zoom_hist",      "zoom_scatter", "follower_ages",     "template_filter",
        "undo",          "newer_only",     "realtime_tweets", "reaction_time",  "extensions",
    };
    return kNames;
}

inline std::string listing_text(const std::string& name) {
    return read_file(source_path("tests/listings/" + name + ".diel"));
}

struct FlightRow {
    std::int64_t year;
    std::string origin;
    std::string destination;
    std::int64_t delay;
    std::int64_t distance;
};

/// Deterministic flights fixture: years 1997..2001, five airports.
inline std::vector<FlightRow> flight_rows(std::size_t n = 60, std::uint32_t seed = 7) {
    static const char* kAirports[] = {"BOS", "JFK", "LAX", "ORD", "SFO"};
    std::mt19937 rng(seed);
    std::vector<FlightRow> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t year = 1997 + static_cast<std::int64_t>(rng() % 5);
        std::string o = kAirports[rng() % 5];
        std::string d = kAirports[rng() % 5];
        std::int64_t delay = static_cast<std::int64_t>(rng() % 120) - 20;
        std::int64_t distance = 100 + static_cast<std::int64_t>(rng() % 2500);
        out.push_back({year, o, d, delay, distance});
    }
    return out;
}

inline Database flights_db(const std::vector<FlightRow>& rows) {
    Database db;
    db.exec("CREATE TABLE flights (year INTEGER, origin TEXT, destination TEXT, delay INTEGER, distance INTEGER)");
    std::vector<Row> data;
    for (const auto& r : rows) data.push_back({r.year, r.origin, r.destination, r.delay, r.distance});
    db.insert_rows("flights", {"year", "origin", "destination", "delay", "distance"}, data);
    return db;
}

inline std::vector<Connection> local_connections(Database db) {
    std::vector<Connection> out;
    out.push_back(Connection{"main", DbKind::InProcess, std::move(db), {}});
    return out;
}

/// Coordinator `main` (empty) plus `remote` holding `db`.
inline std::vector<Connection> remote_connections(Database db, LatencySpec latency) {
    std::vector<Connection> out;
    out.push_back(Connection{"main", DbKind::InProcess, Database{}, {}});
    out.push_back(Connection{"remote", DbKind::Remote, std::move(db), std::move(latency)});
    return out;
}

inline std::unique_ptr<Session> open_session(const std::string& program, std::vector<Connection> conns,
                                             RuntimeOptions options = {}) {
    return Session::open(parse_diel(program), std::move(conns), options);
}

/// First `n` columns of each row, sorted.
inline std::vector<Row> head_columns(const std::vector<Row>& rows, std::size_t n) {
    std::vector<Row> out;
    for (const auto& r : rows) out.emplace_back(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n));
    std::sort(out.begin(), out.end(), row_less);
    return out;
}

inline const OutputFrame* frame_at(const Session& s, const std::string& output, std::int64_t t) {
    for (const auto& f : s.frames())
        if (f.output == output && f.timestep == t) return &f;
    return nullptr;
}

}  // namespace diel::testing
