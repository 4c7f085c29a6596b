// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <set>

#include "diel/cli.hpp"
#include "support.hpp"

using namespace diel;
using namespace diel::testing;
namespace fs = std::filesystem;

namespace {

const std::vector<Example>& corpus() {
    static const std::vector<Example> kExamples = load_examples(source_path("corpus"));
    return kExamples;
}

std::string golden_of(const Example& ex, const ExampleRun& run) {
    return read_file((fs::path(ex.dir) / run.golden).string());
}

}  // namespace

TEST_CASE("corpus covers the listings") {
    CHECK(corpus().size() >= 12);
    std::set<std::string> names;
    std::size_t runs = 0;
    for (const auto& ex : corpus()) {
        names.insert(ex.name);
        runs += ex.runs.size();
        CHECK_FALSE(ex.description.empty());
    }
    for (const auto& listing : listing_names()) CHECK_MESSAGE(names.count(listing), listing);
    CHECK(runs > corpus().size());
    CHECK(fs::exists(source_path("corpus/undo/README.md")));
}

TEST_CASE("every example compiles against its databases") {
    for (const auto& ex : corpus()) {
        CAPTURE(ex.name);
        auto program = load_program(ex.diel, ex.dir);
        for (const auto& run : ex.runs) {
            auto session = Session::open(program, open_connections(run.dbs, ex.dir), RuntimeOptions{});
            for (const auto& d : session->plan().program.diagnostics) CHECK(d.severity != Severity::Error);
            CHECK_FALSE(session->outputs().empty());
        }
    }
}

TEST_CASE("golden logs replay byte for byte") {
    for (const auto& ex : corpus())
        for (const auto& run : ex.runs) {
            CAPTURE(ex.name);
            CAPTURE(run.name);
            auto first = run_example(ex, run, RuntimeOptions{});
            auto second = run_example(ex, run, RuntimeOptions{});
            CHECK(first.frame_log() == golden_of(ex, run));
            CHECK(first.frame_log() == second.frame_log());
            CHECK(first.message_log() == second.message_log());
            CHECK_FALSE(first.frames.empty());
        }
}

TEST_CASE("optimizations off leave every log unchanged") {
    RuntimeOptions plain;
    plain.cache = false;
    plain.materialize = false;
    for (const auto& ex : corpus())
        for (const auto& run : ex.runs) {
            CAPTURE(ex.name);
            CAPTURE(run.name);
            CHECK(run_example(ex, run, plain).frame_log() == golden_of(ex, run));
        }
}

TEST_CASE("a deleted dataset is reported by name") {
    fs::path copy = fs::temp_directory_path() / ("diel_corpus_" + std::to_string(::getpid()));
    fs::remove_all(copy);
    fs::copy(source_path("corpus"), copy, fs::copy_options::recursive);
    CHECK(load_examples(copy.string()).size() == corpus().size());
    fs::remove(copy / "data" / "countries.csv");
    try {
        load_examples(copy.string());
        FAIL("deleted dataset not noticed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingExample);
        CHECK(std::string(e.what()).find("countries.csv") != std::string::npos);
    }
    fs::remove_all(copy);
    CHECK_THROWS_AS(load_examples(copy.string()), Error);
}
