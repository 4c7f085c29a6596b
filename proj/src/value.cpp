// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/value.hpp"

#include <cmath>
#include <sstream>

namespace diel {

namespace {

int rank(const Value& v) {
    if (std::holds_alternative<std::monostate>(v)) return 0;
    if (std::holds_alternative<std::string>(v)) return 2;
    return 1;
}

double as_double(const Value& v) {
    if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
    return std::get<double>(v);
}

}  // namespace

std::weak_ordering compare_values(const Value& a, const Value& b) {
    int ra = rank(a), rb = rank(b);
    if (ra != rb) return ra <=> rb;
    if (ra == 0) return std::weak_ordering::equivalent;
    if (ra == 2) return std::get<std::string>(a).compare(std::get<std::string>(b)) <=> 0;
    auto* ia = std::get_if<std::int64_t>(&a);
    auto* ib = std::get_if<std::int64_t>(&b);
    if (ia && ib) return *ia <=> *ib;
    double da = as_double(a), db = as_double(b);
    if (da < db) return std::weak_ordering::less;
    if (da > db) return std::weak_ordering::greater;
    // Equal numerically: order integers before reals so the sort is total.
    return (ia ? 0 : 1) <=> (ib ? 0 : 1);
}

bool row_less(const Row& a, const Row& b) {
    std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        auto c = compare_values(a[i], b[i]);
        if (c != 0) return c < 0;
    }
    return a.size() < b.size();
}

nlohmann::json value_to_json(const Value& v) {
    return std::visit(
        [](const auto& x) -> nlohmann::json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, std::monostate>) return nullptr;
            else return x;
        },
        v);
}

Value value_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::monostate{};
    if (j.is_boolean()) return static_cast<std::int64_t>(j.get<bool>() ? 1 : 0);
    if (j.is_number_integer()) return j.get<std::int64_t>();
    if (j.is_number_float()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw std::invalid_argument("unsupported JSON value: " + j.dump());
}

nlohmann::json rows_to_json(const std::vector<Row>& rows) {
    auto out = nlohmann::json::array();
    for (const auto& r : rows) {
        auto jr = nlohmann::json::array();
        for (const auto& v : r) jr.push_back(value_to_json(v));
        out.push_back(std::move(jr));
    }
    return out;
}

std::vector<Row> rows_from_json(const nlohmann::json& j) {
    std::vector<Row> rows;
    if (!j.is_array()) throw std::invalid_argument("rows must be an array");
    for (const auto& jr : j) {
        if (!jr.is_array()) throw std::invalid_argument("row must be an array");
        Row r;
        for (const auto& v : jr) r.push_back(value_from_json(v));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string value_to_display(const Value& v) {
    if (is_null(v)) return "NULL";
    if (auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (auto* s = std::get_if<std::string>(&v)) return *s;
    std::ostringstream os;
    os << std::get<double>(v);
    return os.str();
}

}  // namespace diel
