#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace stereocrawl {

enum class ErrorCode {
    // model
    SubjectUnknown,
    InvalidTriple,
    InvalidConfig,
    MalformedRecord,
    SchemaVersionMismatch,
    // backend
    TransportError,
    RemoteRefusal,
    RateLimited,
    EmptyCorpus,
    InvalidRequest,
    MissingCredential,
    // seeds
    EmptyRoster,
    // crawler
    RetriesExhausted,
    InsufficientPool,
    EmptyPool,
    ParseFailure,
    Cancelled,
    // harm
    ScorerTransport,
    ScorerRejectedInput,
    EmptyInput,
    MisalignedInput,
    DegenerateInput,
    // topics
    DimensionMismatch,
    TooFewPoints,
    NoTopics,
    SubjectAllNoise,
    SupportViolation,
    // plumbing
    Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// A persisted record that could not be decoded. `line()` is 1-based.
class MalformedRecordError : public Error {
public:
    MalformedRecordError(std::size_t line, const std::string& reason)
        : Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line) + ": " + reason),
          line_(line),
          reason_(reason) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t line_;
    std::string reason_;
};

/// Remote failure that carries the last HTTP status (0 when the transport
/// itself failed before a status was received).
class HttpError : public Error {
public:
    HttpError(ErrorCode code, int status, const std::string& message)
        : Error(code, message), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

}  // namespace stereocrawl
