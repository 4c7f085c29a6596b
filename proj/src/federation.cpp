// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/federation.hpp"

#include "diel/parser.hpp"

namespace diel {

namespace {

MessageKind kind_from_name(const std::string& name) {
    for (MessageKind k : {MessageKind::SetupProgram, MessageKind::ShipData, MessageKind::EvalRequest,
                          MessageKind::ResultRows})
        if (message_kind_name(k) == name) return k;
    throw Error(ErrorCode::WireFormatError, "unknown message kind '" + name + "'");
}

}  // namespace

std::string_view message_kind_name(MessageKind kind) {
    switch (kind) {
    case MessageKind::SetupProgram: return "SetupProgram";
    case MessageKind::ShipData: return "ShipData";
    case MessageKind::EvalRequest: return "EvalRequest";
    case MessageKind::ResultRows: return "ResultRows";
    }
    return "?";
}

// ── wire format ────────────────────────────────────────────────

nlohmann::ordered_json message_to_json(const Message& m) {
    nlohmann::ordered_json j;
    j["kind"] = message_kind_name(m.kind);
    j["from"] = m.from;
    j["to"] = m.to;
    if (m.kind == MessageKind::EvalRequest || m.kind == MessageKind::ResultRows) j["view"] = m.view;
    if (m.kind == MessageKind::ShipData) j["relation"] = m.relation;
    if (m.kind == MessageKind::ShipData || m.kind == MessageKind::ResultRows)
        j["rows"] = rows_to_json(m.rows);
    j["request_timestep"] = m.request_timestep;
    j["send_ms"] = m.send_ms;
    j["deliver_ms"] = m.deliver_ms;
    j["seq"] = m.seq;
    if (m.kind == MessageKind::SetupProgram) j["sql"] = m.sql;
    return j;
}

Message message_from_json(const nlohmann::json& j) {
    try {
        Message m;
        m.kind = kind_from_name(j.at("kind").get<std::string>());
        m.from = j.value("from", "");
        m.to = j.value("to", "");
        m.view = j.value("view", "");
        m.relation = j.value("relation", "");
        if (j.contains("rows")) m.rows = rows_from_json(j.at("rows"));
        m.request_timestep = j.at("request_timestep").get<std::int64_t>();
        m.send_ms = j.at("send_ms").get<std::int64_t>();
        m.deliver_ms = j.at("deliver_ms").get<std::int64_t>();
        m.seq = j.value("seq", std::uint64_t{0});
        m.sql = j.value("sql", "");
        if (m.deliver_ms < m.send_ms)
            throw Error(ErrorCode::WireFormatError, "deliver_ms precedes send_ms");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::WireFormatError, std::string("bad message: ") + e.what());
    }
}

std::string encode_frame(const Message& m) {
    std::string body = message_to_json(m).dump();
    std::uint32_t n = static_cast<std::uint32_t>(body.size());
    std::string out;
    out.reserve(4 + body.size());
    for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<char>((n >> shift) & 0xff));
    out += body;
    return out;
}

std::vector<Message> decode_frames(std::string_view bytes) {
    std::vector<Message> out;
    std::size_t pos = 0;
    while (pos < bytes.size()) {
        if (bytes.size() - pos < 4)
            throw Error(ErrorCode::WireFormatError, "truncated length prefix at byte " + std::to_string(pos));
        std::uint32_t n = 0;
        for (int i = 0; i < 4; ++i) n = (n << 8) | static_cast<unsigned char>(bytes[pos + i]);
        pos += 4;
        if (bytes.size() - pos < n)
            throw Error(ErrorCode::WireFormatError,
                        "frame announces " + std::to_string(n) + " bytes, " +
                            std::to_string(bytes.size() - pos) + " remain");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(bytes.substr(pos, n));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::WireFormatError, std::string("bad frame payload: ") + e.what());
        }
        out.push_back(message_from_json(j));
        pos += n;
    }
    return out;
}

// ── instance queue ─────────────────────────────────────────────

void InstanceQueue::push(Message m) {
    auto key = std::make_tuple(m.request_timestep, m.seq, m.from);
    pending_.emplace(std::move(key), std::move(m));
}

std::optional<Message> InstanceQueue::pop_ready() {
    for (auto it = pending_.begin(); it != pending_.end(); ++it) {
        const Message& m = it->second;
        if (m.seq != applied_[m.from] + 1) continue;
        applied_[m.from] = m.seq;
        Message out = std::move(it->second);
        pending_.erase(it);
        return out;
    }
    return std::nullopt;
}

// ── instance ───────────────────────────────────────────────────

Instance::Instance(std::string id, DbKind kind, Database db)
    : id_(std::move(id)), kind_(kind), db_(std::move(db)) {}

void Instance::install(const DbProgram& program) {
    for (const auto& sql : program.setup) {
        try {
            db_.exec(sql);
        } catch (const Error& e) {
            throw Error(ErrorCode::SetupFailure, "setup of instance '" + id_ + "' failed: " + e.what());
        }
    }
    for (const auto& [view, sql] : program.named_queries) named_queries_[view] = sql;
    columns_.clear();
}

const std::vector<std::string>& Instance::columns_of(const std::string& relation) {
    auto it = columns_.find(relation);
    if (it != columns_.end()) return it->second;
    std::vector<std::string> cols;
    for (const auto& m : db_.table_columns(relation)) cols.push_back(m.name);
    return columns_[relation] = std::move(cols);
}

std::vector<Row> Instance::evaluate(const std::string& view) {
    auto it = named_queries_.find(view);
    if (it == named_queries_.end())
        throw Error(ErrorCode::UnknownAsyncView,
                    "instance '" + id_ + "' has no query for async view '" + view + "'");
    return db_.query(it->second, {}, "async view " + view + " at " + id_).rows;
}

std::vector<Message> Instance::step(std::int64_t now_ms) {
    std::vector<Message> out;
    while (auto m = queue_.pop_ready()) {
        switch (m->kind) {
        case MessageKind::SetupProgram: db_.exec(m->sql, "setup at " + id_); break;
        case MessageKind::ShipData: db_.insert_rows(m->relation, columns_of(m->relation), m->rows); break;
        case MessageKind::EvalRequest: {
            Message r;
            r.kind = MessageKind::ResultRows;
            r.from = id_;
            r.to = m->from;
            r.view = m->view;
            r.rows = evaluate(m->view);
            r.request_timestep = m->request_timestep;
            r.send_ms = now_ms;
            evaluated_.push_back(m->request_timestep);
            out.push_back(std::move(r));
            break;
        }
        case MessageKind::ResultRows:
            throw Error(ErrorCode::WireFormatError, "instance '" + id_ + "' received result rows");
        }
    }
    return out;
}

// ── federation ─────────────────────────────────────────────────

Federation::Federation(std::string coordinator, std::uint64_t seed)
    : coordinator_(std::move(coordinator)), seed_(seed) {}

Instance& Federation::add_instance(std::string id, DbKind kind, Database db, LatencySpec response_latency) {
    response_latency_[id] = std::move(response_latency);
    auto inst = std::make_unique<Instance>(id, kind, std::move(db));
    Instance& ref = *inst;
    instances_[id] = std::move(inst);
    return ref;
}

Instance& Federation::instance(std::string_view id) {
    auto it = instances_.find(std::string(id));
    if (it == instances_.end()) throw Error(ErrorCode::ConfigError, "unknown instance '" + std::string(id) + "'");
    return *it->second;
}

bool Federation::has_instance(std::string_view id) const { return instances_.count(std::string(id)) > 0; }

void Federation::install(const FederationPlan& plan) {
    for (const auto& d : plan.dbs) {
        Instance& inst = instance(d.id);
        const DbProgram& prog = plan.programs.at(d.id);
        std::string text;
        for (const auto& s : prog.setup) text += s + ";\n";
        Message m;
        m.kind = MessageKind::SetupProgram;
        m.from = coordinator_;
        m.to = d.id;
        m.sql = text;
        m.send_ms = m.deliver_ms = now_;
        log_.push_back(m);
        inst.install(prog);
    }
    for (const auto& s : plan.snapshots) {
        Instance& from = instance(s.from);
        Instance& to = instance(s.to);
        auto data = from.db().query("SELECT * FROM " + quote_ident(s.relation), {}, "snapshot " + s.relation);
        try {
            to.db().insert_rows(s.relation, data.columns, data.rows);
        } catch (const Error& e) {
            throw Error(ErrorCode::SetupFailure, "snapshot of '" + s.relation + "' into '" + s.to +
                                                     "' failed: " + e.what());
        }
        Message m;
        m.kind = MessageKind::ShipData;
        m.from = s.from;
        m.to = s.to;
        m.relation = s.relation;
        m.rows = std::move(data.rows);
        m.send_ms = m.deliver_ms = now_;
        log_.push_back(std::move(m));
    }
}

void Federation::set_link_latency(const std::string& from, const std::string& to, LatencySpec spec) {
    link_specs_[{from, to}] = std::move(spec);
    links_.erase({from, to});
}

LatencyModel& Federation::link(const std::string& from, const std::string& to) {
    auto key = std::make_pair(from, to);
    auto it = links_.find(key);
    if (it != links_.end()) return it->second;
    LatencySpec spec;
    if (auto s = link_specs_.find(key); s != link_specs_.end()) spec = s->second;
    else if (from != to && to == coordinator_) spec = response_latency_[from];
    else spec = LatencySpec::fixed(0);
    return links_.emplace(key, LatencyModel(spec, seed_, from + "->" + to)).first->second;
}

const Message& Federation::send(Message m) {
    m.send_ms = now_;
    m.deliver_ms = now_ + link(m.from, m.to).sample();
    m.seq = ++link_seq_[{m.from, m.to}];
    log_.push_back(m);
    Message copy = m;
    scheduled_.push(Item{copy.deliver_ms, order_++, [this, copy] { deliver(copy); }});
    return log_.back();
}

void Federation::schedule(std::int64_t at_ms, std::function<void()> action) {
    scheduled_.push(Item{std::max(at_ms, now_), order_++, std::move(action)});
}

void Federation::deliver(const Message& m) {
    if (m.to == coordinator_ && (m.kind == MessageKind::ResultRows)) {
        if (coordinator_handler_) coordinator_handler_(m);
        return;
    }
    Instance& inst = instance(m.to);
    inst.queue().push(m);
    for (auto& out : inst.step(now_)) send(std::move(out));
}

bool Federation::step() {
    if (scheduled_.empty()) return false;
    Item item = scheduled_.top();
    scheduled_.pop();
    now_ = std::max(now_, item.at_ms);
    item.action();
    return true;
}

void Federation::advance_to(std::int64_t at_ms) {
    while (!scheduled_.empty() && scheduled_.top().at_ms < at_ms) step();
    now_ = std::max(now_, at_ms);
}

void Federation::run_due() {
    while (!scheduled_.empty() && scheduled_.top().at_ms <= now_) step();
}

std::int64_t Federation::run_until_quiescent(std::int64_t deadline_ms) {
    while (!scheduled_.empty()) {
        if (scheduled_.top().at_ms > deadline_ms)
            throw Error(ErrorCode::DeadlineExceeded,
                        std::to_string(scheduled_.size()) + " deliveries still pending at deadline " +
                            std::to_string(deadline_ms) + " ms");
        step();
    }
    for (const auto& [id, inst] : instances_)
        if (!inst->queue().empty())
            throw Error(ErrorCode::DependencyTimeout,
                        "instance '" + id + "' holds " + std::to_string(inst->queue().size()) +
                            " messages whose predecessors never arrived");
    return now_;
}

std::size_t Federation::remote_message_count() const {
    std::size_t n = 0;
    for (const auto& m : log_)
        if (m.from != m.to && m.kind != MessageKind::SetupProgram) ++n;
    return n;
}

std::size_t Federation::remote_message_count(MessageKind kind) const {
    std::size_t n = 0;
    for (const auto& m : log_)
        if (m.from != m.to && m.kind == kind) ++n;
    return n;
}

}  // namespace diel
