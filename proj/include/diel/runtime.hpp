// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diel/federation.hpp"
#include "diel/optimizer.hpp"
#include "diel/planner.hpp"

namespace diel {

struct RuntimeOptions {
    std::uint64_t seed = 0;
    bool cache = true;
    bool materialize = true;
    /// Suppress a frame whose rows equal the previous frame of that output.
    bool dedupe_frames = false;
};

struct OutputFrame {
    std::string output;
    std::int64_t timestep = 0;
    std::vector<std::string> columns;
    std::vector<Row> rows;
};

/// `{"output":..., "timestep":..., "rows":[[...], ...]}`
nlohmann::ordered_json frame_to_json(const OutputFrame& frame);

struct EventRecord {
    std::string relation;
    std::vector<std::string> columns;  // user columns
    std::vector<Row> rows;             // one row for interaction events
    std::int64_t timestep = 0;
    std::int64_t timestamp = 0;
    std::optional<std::int64_t> request_timestep;  // async results only
};

using RenderCallback = std::function<void(const OutputFrame&)>;

struct OutputBinding {
    std::string output;
    RenderCallback callback;
};

/// A database handed to the runtime.
struct Connection {
    std::string id;
    DbKind kind = DbKind::InProcess;
    Database db;
    LatencySpec latency;
};

struct RunStats {
    std::size_t events = 0;
    std::size_t async_results = 0;
    std::size_t frames = 0;
    std::size_t eval_requests = 0;  // dispatched to a non-coordinator instance
    std::size_t remote_messages = 0;
    std::size_t cache_hits = 0;
    std::size_t cache_misses = 0;
    std::size_t diagnostics = 0;
    std::size_t materialized_views = 0;
};

/// The coordinator event loop over a planned federation.
class Session {
public:
    /// Describes the connections, compiles the statements against their
    /// tables, plans, and sets up.
    static std::unique_ptr<Session> open(const std::vector<Statement>& statements,
                                         std::vector<Connection> connections,
                                         const RuntimeOptions& options = {},
                                         std::vector<OutputBinding> bindings = {});

    /// Runs the per-instance programs. Throws SetupFailure, UnknownOutput.
    Session(FederationPlan plan, std::vector<Connection> connections, const RuntimeOptions& options,
            std::vector<OutputBinding> bindings = {});

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    /// Appends one interaction event at virtual time `at_ms`, advancing the
    /// federation to that time first. Returns the assigned timestep; nullopt
    /// when a CHECK rejected the payload or the call arrived while a
    /// timestep was being processed (it is then queued).
    /// Throws UnknownEvent, TypeMismatch.
    std::optional<std::int64_t> new_event(const std::string& name, const nlohmann::json& payload,
                                          std::int64_t at_ms);

    /// Admits an async view's result rows as the next timestep.
    /// Throws UnknownAsyncView, SchemaMismatch.
    std::optional<std::int64_t> on_async_result(const std::string& view, const std::vector<Row>& rows,
                                                std::int64_t request_timestep, std::int64_t at_ms);

    /// Schedules `new_event` on the virtual clock.
    void schedule_event(std::string name, nlohmann::json payload, std::int64_t at_ms);

    /// Delivers everything due before `at_ms` and moves the clock there.
    void advance_to(std::int64_t at_ms) { federation_->advance_to(at_ms); }

    /// Delivers all in-flight messages and scheduled events.
    std::int64_t run_until_quiescent(std::int64_t deadline_ms = std::int64_t{1} << 50);

    void bind_output(const std::string& output, RenderCallback callback);

    /// Evaluates an output against the current state without rendering.
    OutputFrame evaluate_output(const std::string& output);

    std::int64_t clock() const { return clock_; }
    const std::vector<EventRecord>& event_log() const { return log_; }
    const std::vector<OutputFrame>& frames() const { return frames_; }
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }
    RunStats stats() const;

    /// Output names in evaluation order.
    const std::vector<std::string>& outputs() const { return outputs_; }
    const FederationPlan& plan() const { return plan_; }
    const MaterializationPlan& materialization() const { return materialization_; }
    const RequestCache& cache() const { return cache_; }
    Federation& federation() { return *federation_; }
    Database& coordinator_db();

private:
    std::optional<std::int64_t> admit_event(const RelationDef& rel, const Row& row, std::int64_t at_ms);
    void dispatch_async(const std::string& trigger, std::int64_t t);
    void request(const std::string& view, std::int64_t t);
    nlohmann::json cache_params(const std::string& view);
    void process_timestep(std::int64_t t, const std::string& trigger);
    void refresh(const std::string& view);
    bool check_passes(const RelationDef& rel, const Row& row);
    Row coerce_payload(const RelationDef& rel, const nlohmann::json& payload) const;
    void render(std::vector<OutputFrame> frames);
    void drain_deferred();

    FederationPlan plan_;
    RuntimeOptions options_;
    std::unique_ptr<Federation> federation_;
    MaterializationPlan materialization_;
    RequestCache cache_;

    std::int64_t clock_ = 0;
    std::vector<EventRecord> log_;
    std::vector<OutputFrame> frames_;
    std::vector<Diagnostic> diagnostics_;
    std::map<std::string, std::vector<RenderCallback>> callbacks_;
    std::map<std::string, std::vector<Row>> last_rows_;

    std::vector<std::string> outputs_;  // evaluation order
    std::map<std::string, std::set<std::string>> closure_;
    std::map<std::string, std::map<std::string, std::int64_t>> shipped_upto_;
    std::map<std::pair<std::string, std::int64_t>, nlohmann::json> pending_params_;
    std::map<std::string, bool> cacheable_;
    std::set<std::string> committed_;  // history tables written at the end of the last timestep

    bool processing_ = false;
    std::vector<std::function<void()>> deferred_;
    std::size_t eval_requests_ = 0;
    std::size_t async_results_ = 0;
    std::size_t events_ = 0;
};

}  // namespace diel
