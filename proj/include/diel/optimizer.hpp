// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "diel/planner.hpp"

namespace diel {

struct MaterializationPlan {
    /// Materialized views in evaluation order.
    std::vector<std::string> views;
    /// View to the stored relations whose change triggers a refresh.
    std::map<std::string, std::vector<std::string>> refresh_deps;
};

struct MaterializationResult {
    Catalog catalog;
    MaterializationPlan plan;
};

/// Marks views with two or more consumers as materialized. Views whose
/// closure calls RANDOM() stay virtual, since refreshing them on a
/// schedule would change which draws each reader sees. When `eligible` is
/// given only those views are considered.
MaterializationResult materialize_shared_views(const Catalog& catalog, const DependencyGraph& graph,
                                               const std::set<std::string>* eligible = nullptr);

/// Applies materialization to the coordinator-resident views of a plan and
/// re-emits its SQL programs.
MaterializationPlan apply_materialization(FederationPlan& plan);

/// True when an async view's result is a function of the latest tuples of
/// its event tables and static data only, so identical parameters give
/// identical rows.
bool is_cacheable(const std::string& view, const Catalog& catalog);

struct RequestCacheRow {
    std::string hash;
    std::int64_t data_id = 0;
    std::string view_name;
};

class RequestCache {
public:
    /// Hex digest of the view name and the canonical JSON of the parameters.
    static std::string key(const std::string& view, const nlohmann::json& params);

    /// Returns the data id on a hit; counts hits and misses.
    std::optional<std::int64_t> lookup(const std::string& view, const nlohmann::json& params);

    /// Stores rows for (view, params). Identical row sets share one data id.
    std::int64_t store(const std::string& view, const nlohmann::json& params, const std::vector<Row>& rows);

    const std::vector<Row>& rows(std::int64_t data_id) const;
    const std::vector<RequestCacheRow>& entries() const { return entries_; }
    std::size_t hits() const { return hits_; }
    std::size_t misses() const { return misses_; }
    std::size_t stored_row_sets() const { return data_.size(); }

private:
    std::map<std::string, std::size_t> by_hash_;  // hash -> index into entries_
    std::vector<RequestCacheRow> entries_;
    std::map<std::int64_t, std::vector<Row>> data_;
    std::multimap<std::uint64_t, std::int64_t> by_digest_;
    std::size_t hits_ = 0;
    std::size_t misses_ = 0;
};

}  // namespace diel
