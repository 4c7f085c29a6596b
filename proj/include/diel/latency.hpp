// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace diel {

enum class LatencyKind { Fixed, UniformRange, Scripted };

struct LatencySpec {
    LatencyKind kind = LatencyKind::Fixed;
    std::int64_t fixed_ms = 0;
    std::int64_t lo_ms = 0;
    std::int64_t hi_ms = 0;
    std::vector<std::int64_t> script;

    static LatencySpec fixed(std::int64_t ms) { return {LatencyKind::Fixed, ms, 0, 0, {}}; }
    static LatencySpec uniform(std::int64_t lo, std::int64_t hi) {
        return {LatencyKind::UniformRange, 0, lo, hi, {}};
    }
    static LatencySpec scripted(std::vector<std::int64_t> delays) {
        return {LatencyKind::Scripted, 0, 0, 0, std::move(delays)};
    }
    bool operator==(const LatencySpec&) const = default;
};

/// Parses `fixed=N`, `uniform=LO-HI` or `script=a,b,c`; throws ConfigError.
LatencySpec parse_latency(std::string_view text);
std::string latency_to_string(const LatencySpec& spec);

/// Samples per-message delays. Uniform draws come from a generator seeded
/// with (seed, salt); scripted delays are consumed in order.
class LatencyModel {
public:
    LatencyModel() = default;
    LatencyModel(LatencySpec spec, std::uint64_t seed, std::string_view salt);

    /// Throws ScriptExhausted once a script runs out.
    std::int64_t sample();
    const LatencySpec& spec() const { return spec_; }
    std::size_t sampled() const { return sampled_; }

private:
    LatencySpec spec_;
    std::mt19937_64 rng_;
    std::size_t sampled_ = 0;
};

}  // namespace diel
