#include "stereocrawl/error.hpp"

namespace stereocrawl {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SubjectUnknown: return "SubjectUnknown";
        case ErrorCode::InvalidTriple: return "InvalidTriple";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::SchemaVersionMismatch: return "SchemaVersionMismatch";
        case ErrorCode::TransportError: return "TransportError";
        case ErrorCode::RemoteRefusal: return "RemoteRefusal";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::EmptyCorpus: return "EmptyCorpus";
        case ErrorCode::InvalidRequest: return "InvalidRequest";
        case ErrorCode::MissingCredential: return "MissingCredential";
        case ErrorCode::EmptyRoster: return "EmptyRoster";
        case ErrorCode::RetriesExhausted: return "RetriesExhausted";
        case ErrorCode::InsufficientPool: return "InsufficientPool";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::ParseFailure: return "ParseFailure";
        case ErrorCode::Cancelled: return "Cancelled";
        case ErrorCode::ScorerTransport: return "ScorerTransport";
        case ErrorCode::ScorerRejectedInput: return "ScorerRejectedInput";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::MisalignedInput: return "MisalignedInput";
        case ErrorCode::DegenerateInput: return "DegenerateInput";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::TooFewPoints: return "TooFewPoints";
        case ErrorCode::NoTopics: return "NoTopics";
        case ErrorCode::SubjectAllNoise: return "SubjectAllNoise";
        case ErrorCode::SupportViolation: return "SupportViolation";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace stereocrawl
