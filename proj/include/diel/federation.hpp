// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "diel/latency.hpp"
#include "diel/planner.hpp"
#include "diel/sqlite.hpp"

namespace diel {

enum class MessageKind { SetupProgram, ShipData, EvalRequest, ResultRows };

std::string_view message_kind_name(MessageKind kind);

struct Message {
    MessageKind kind = MessageKind::EvalRequest;
    std::string from;
    std::string to;
    std::string view;      // EvalRequest, ResultRows
    std::string relation;  // ShipData
    std::vector<Row> rows; // ShipData, ResultRows
    std::int64_t request_timestep = 0;
    std::int64_t send_ms = 0;
    std::int64_t deliver_ms = 0;
    /// Position on the (from, to) link, starting at 1.
    std::uint64_t seq = 0;
    std::string sql;  // SetupProgram

    bool operator==(const Message&) const = default;
};

nlohmann::ordered_json message_to_json(const Message& m);
/// Throws WireFormatError.
Message message_from_json(const nlohmann::json& j);

/// One frame: 4-byte big-endian payload length, then the JSON text.
std::string encode_frame(const Message& m);
/// Decodes a concatenation of frames; throws WireFormatError on truncation
/// or malformed payloads.
std::vector<Message> decode_frames(std::string_view bytes);

/// Messages an instance has received but not yet applied, ordered by
/// request timestep. A message becomes ready once every earlier message on
/// its link has been applied, so shipments for t always precede the
/// evaluation of t.
class InstanceQueue {
public:
    void push(Message m);
    std::optional<Message> pop_ready();
    bool empty() const { return pending_.empty(); }
    std::size_t size() const { return pending_.size(); }

private:
    std::map<std::tuple<std::int64_t, std::uint64_t, std::string>, Message> pending_;
    std::map<std::string, std::uint64_t> applied_;  // sender -> last applied seq
};

/// One database instance and its queue.
class Instance {
public:
    Instance(std::string id, DbKind kind, Database db);

    const std::string& id() const { return id_; }
    DbKind kind() const { return kind_; }
    Database& db() { return db_; }
    InstanceQueue& queue() { return queue_; }

    /// Runs setup statements; throws SetupFailure naming the instance.
    void install(const DbProgram& program);

    /// Applies every ready message; returns the result messages produced.
    std::vector<Message> step(std::int64_t now_ms);

    /// Request timesteps evaluated so far, in evaluation order.
    const std::vector<std::int64_t>& evaluated() const { return evaluated_; }

    /// Runs an async view's named query.
    std::vector<Row> evaluate(const std::string& view);

private:
    const std::vector<std::string>& columns_of(const std::string& relation);

    std::string id_;
    DbKind kind_;
    Database db_;
    InstanceQueue queue_;
    std::map<std::string, std::string> named_queries_;
    std::map<std::string, std::vector<std::string>> columns_;
    std::vector<std::int64_t> evaluated_;
};

/// Instances plus a virtual-clock transport. Deliveries happen in
/// (deliver_ms, scheduling order); nothing runs on other threads.
class Federation {
public:
    Federation(std::string coordinator, std::uint64_t seed);

    Instance& add_instance(std::string id, DbKind kind, Database db, LatencySpec response_latency);
    Instance& instance(std::string_view id);
    bool has_instance(std::string_view id) const;
    const std::string& coordinator() const { return coordinator_; }

    /// Executes every instance's setup program and copies snapshots.
    void install(const FederationPlan& plan);

    /// Overrides the latency of one directed link.
    void set_link_latency(const std::string& from, const std::string& to, LatencySpec spec);

    /// Receives messages addressed to the coordinator.
    void on_coordinator_message(std::function<void(const Message&)> handler) {
        coordinator_handler_ = std::move(handler);
    }

    /// Stamps send/deliver times and the link sequence number, logs the
    /// message and schedules its delivery. Throws ScriptExhausted.
    const Message& send(Message m);

    /// Schedules a local action at `at_ms` (never earlier than now).
    void schedule(std::int64_t at_ms, std::function<void()> action);

    /// Runs the next scheduled item; false when nothing is scheduled.
    bool step();

    /// Runs every item due before `at_ms`, then sets the clock to `at_ms`.
    void advance_to(std::int64_t at_ms);

    /// Runs every item due at or before the current time.
    void run_due();

    /// Delivers everything. Throws DeadlineExceeded if work remains past
    /// `deadline_ms`, DependencyTimeout if an instance queue is stuck.
    std::int64_t run_until_quiescent(std::int64_t deadline_ms);

    std::int64_t now() const { return now_; }
    bool idle() const { return scheduled_.empty(); }
    const std::vector<Message>& messages() const { return log_; }
    /// Messages that crossed between two different instances.
    std::size_t remote_message_count() const;
    std::size_t remote_message_count(MessageKind kind) const;

private:
    struct Item {
        std::int64_t at_ms;
        std::uint64_t order;
        std::function<void()> action;
    };
    struct Later {
        bool operator()(const Item& a, const Item& b) const {
            return std::tie(a.at_ms, a.order) > std::tie(b.at_ms, b.order);
        }
    };
    void deliver(const Message& m);
    LatencyModel& link(const std::string& from, const std::string& to);

    std::string coordinator_;
    std::uint64_t seed_;
    std::map<std::string, std::unique_ptr<Instance>> instances_;
    std::map<std::string, LatencySpec> response_latency_;
    std::map<std::pair<std::string, std::string>, LatencySpec> link_specs_;
    std::map<std::pair<std::string, std::string>, LatencyModel> links_;
    std::map<std::pair<std::string, std::string>, std::uint64_t> link_seq_;
    std::priority_queue<Item, std::vector<Item>, Later> scheduled_;
    std::uint64_t order_ = 0;
    std::int64_t now_ = 0;
    std::vector<Message> log_;
    std::function<void(const Message&)> coordinator_handler_;
};

}  // namespace diel
