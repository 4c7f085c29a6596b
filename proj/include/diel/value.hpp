// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace diel {

/// A single SQL value as exchanged with the embedded engine.
using Value = std::variant<std::monostate, std::int64_t, double, std::string>;
using Row = std::vector<Value>;

inline bool is_null(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Total order used for frame normalization: NULL < numbers < text.
/// Integers and reals compare numerically, as the engine does.
std::weak_ordering compare_values(const Value& a, const Value& b);
bool row_less(const Row& a, const Row& b);

nlohmann::json value_to_json(const Value& v);
Value value_from_json(const nlohmann::json& j);
nlohmann::json rows_to_json(const std::vector<Row>& rows);
std::vector<Row> rows_from_json(const nlohmann::json& j);

/// Display form used by the text renderer (not the log).
std::string value_to_display(const Value& v);

}  // namespace diel
