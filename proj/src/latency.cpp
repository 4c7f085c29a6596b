// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/latency.hpp"

#include <charconv>

#include "diel/error.hpp"
#include "diel/hash.hpp"

namespace diel {

namespace {

std::int64_t parse_ms(std::string_view text, std::string_view whole) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || v < 0)
        throw Error(ErrorCode::ConfigError,
                    "bad latency '" + std::string(whole) + "': '" + std::string(text) +
                        "' is not a non-negative integer");
    return v;
}

}  // namespace

LatencySpec parse_latency(std::string_view text) {
    auto eq = text.find('=');
    if (eq == std::string_view::npos) return LatencySpec::fixed(parse_ms(text, text));
    std::string_view kind = text.substr(0, eq), arg = text.substr(eq + 1);
    if (kind == "fixed") return LatencySpec::fixed(parse_ms(arg, text));
    if (kind == "uniform") {
        auto dash = arg.find('-');
        if (dash == std::string_view::npos)
            throw Error(ErrorCode::ConfigError, "bad latency '" + std::string(text) + "': expected LO-HI");
        std::int64_t lo = parse_ms(arg.substr(0, dash), text), hi = parse_ms(arg.substr(dash + 1), text);
        if (lo > hi)
            throw Error(ErrorCode::ConfigError, "bad latency '" + std::string(text) + "': LO exceeds HI");
        return LatencySpec::uniform(lo, hi);
    }
    if (kind == "script") {
        if (arg.empty()) throw Error(ErrorCode::ConfigError, "bad latency '" + std::string(text) + "': empty script");
        std::vector<std::int64_t> delays;
        while (!arg.empty()) {
            auto comma = arg.find(',');
            delays.push_back(parse_ms(arg.substr(0, comma), text));
            arg = comma == std::string_view::npos ? std::string_view{} : arg.substr(comma + 1);
        }
        return LatencySpec::scripted(std::move(delays));
    }
    throw Error(ErrorCode::ConfigError,
                "bad latency '" + std::string(text) + "': expected fixed=N, uniform=LO-HI or script=a,b,c");
}

std::string latency_to_string(const LatencySpec& spec) {
    switch (spec.kind) {
    case LatencyKind::Fixed: return "fixed=" + std::to_string(spec.fixed_ms);
    case LatencyKind::UniformRange:
        return "uniform=" + std::to_string(spec.lo_ms) + "-" + std::to_string(spec.hi_ms);
    case LatencyKind::Scripted: {
        std::string out = "script=";
        for (std::size_t i = 0; i < spec.script.size(); ++i)
            out += (i ? "," : "") + std::to_string(spec.script[i]);
        return out;
    }
    }
    return "?";
}

LatencyModel::LatencyModel(LatencySpec spec, std::uint64_t seed, std::string_view salt)
    : spec_(std::move(spec)), rng_(seed ^ fnv1a64(salt)) {}

std::int64_t LatencyModel::sample() {
    std::size_t index = sampled_++;
    switch (spec_.kind) {
    case LatencyKind::Fixed: return spec_.fixed_ms;
    case LatencyKind::UniformRange:
        return std::uniform_int_distribution<std::int64_t>(spec_.lo_ms, spec_.hi_ms)(rng_);
    case LatencyKind::Scripted:
        if (index >= spec_.script.size())
            throw Error(ErrorCode::ScriptExhausted,
                        "latency script has " + std::to_string(spec_.script.size()) +
                            " delays but message " + std::to_string(index + 1) + " needs one");
        return spec_.script[index];
    }
    return 0;
}

}  // namespace diel
