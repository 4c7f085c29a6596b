// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#include "diel/error.hpp"

namespace diel {

std::string_view error_code_name(ErrorCode code) {
    switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownKeyword: return "UnknownKeyword";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::MissingBinding: return "MissingBinding";
    case ErrorCode::SubstitutionParseError: return "SubstitutionParseError";
    case ErrorCode::UnknownSourceRelation: return "UnknownSourceRelation";
    case ErrorCode::UnknownRelation: return "UnknownRelation";
    case ErrorCode::DuplicateRelation: return "DuplicateRelation";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::LatestOnNonEvent: return "LatestOnNonEvent";
    case ErrorCode::ReservedColumnName: return "ReservedColumnName";
    case ErrorCode::CyclicDependency: return "CyclicDependency";
    case ErrorCode::InvalidProgram: return "InvalidProgram";
    case ErrorCode::TypeCheckError: return "TypeCheckError";
    case ErrorCode::UnsupportedSpan: return "UnsupportedSpan";
    case ErrorCode::SetupFailure: return "SetupFailure";
    case ErrorCode::UnknownEvent: return "UnknownEvent";
    case ErrorCode::UnknownOutput: return "UnknownOutput";
    case ErrorCode::UnknownAsyncView: return "UnknownAsyncView";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::EngineError: return "EngineError";
    case ErrorCode::ScriptExhausted: return "ScriptExhausted";
    case ErrorCode::DeadlineExceeded: return "DeadlineExceeded";
    case ErrorCode::DependencyTimeout: return "DependencyTimeout";
    case ErrorCode::WireFormatError: return "WireFormatError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::TraceParseError: return "TraceParseError";
    case ErrorCode::MissingExample: return "MissingExample";
    }
    return "Unknown";
}

namespace {

std::string format_syntax_error(const std::string& msg, const SourcePos& pos,
                                const std::vector<std::string>& expected) {
    std::string out = std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg;
    if (!expected.empty()) {
        out += " (expected ";
        for (std::size_t i = 0; i < expected.size(); ++i) {
            if (i) out += i + 1 == expected.size() ? " or " : ", ";
            out += expected[i];
        }
        out += ")";
    }
    return out;
}

}  // namespace

SyntaxError::SyntaxError(ErrorCode code, const std::string& msg, SourcePos pos,
                         std::vector<std::string> expected)
    : Error(code, format_syntax_error(msg, pos, expected)),
      pos_(pos),
      expected_(std::move(expected)),
      detail_(msg) {}

}  // namespace diel
