// Copyright 2026 The diel Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace diel {

enum class ErrorCode {
    // dialect
    SyntaxError,
    UnknownKeyword,
    // compiler
    UnknownTemplate,
    MissingBinding,
    SubstitutionParseError,
    UnknownSourceRelation,
    UnknownRelation,
    DuplicateRelation,
    UnknownFunction,
    LatestOnNonEvent,
    ReservedColumnName,
    CyclicDependency,
    InvalidProgram,
    TypeCheckError,
    // planner
    UnsupportedSpan,
    // runtime
    SetupFailure,
    UnknownEvent,
    UnknownOutput,
    UnknownAsyncView,
    TypeMismatch,
    SchemaMismatch,
    EngineError,
    // federation
    ScriptExhausted,
    DeadlineExceeded,
    DependencyTimeout,
    WireFormatError,
    // harness
    ConfigError,
    TraceParseError,
    MissingExample,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A position in DIEL source text. Line and column are 1-based.
struct SourcePos {
    std::size_t offset = 0;
    std::size_t line = 1;
    std::size_t column = 1;
};

struct SourceSpan {
    SourcePos begin;
    SourcePos end;  // one past the last character
};

class SyntaxError : public Error {
public:
    SyntaxError(ErrorCode code, const std::string& msg, SourcePos pos,
                std::vector<std::string> expected = {});

    const SourcePos& pos() const noexcept { return pos_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }
    /// Message without the "line:col:" prefix.
    const std::string& detail() const noexcept { return detail_; }

private:
    SourcePos pos_;
    std::vector<std::string> expected_;
    std::string detail_;
};

enum class Severity { Info, Warning, Error };

/// Non-fatal findings: constraint violations, ignored events, well-formedness.
struct Diagnostic {
    Severity severity = Severity::Warning;
    std::string code;
    std::string message;
    std::int64_t timestep = -1;  // -1 when not tied to a timestep
};

}  // namespace diel
