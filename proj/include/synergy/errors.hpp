#pragma once

#include <stdexcept>
#include <string>

namespace synergy {

enum class ErrorCode {
    AllZero,           // entropy input without a single positive count
    EmptySubset,       // marginalization over an empty axis set
    NegativeEmployees, // size classification of a negative value
    MalformedCode,     // NACE code fails the 2-4 digit format
    UnmappedLocation,  // no hierarchy prefix matches a location code
    InvalidHierarchy,  // hierarchy file unusable (parse or structure)
    EmptyPartition,    // decomposition asked to run over zero groups
    ZeroTotal,         // percentage of a zero total
    BadCounts,         // sector normalization with inconsistent counts
    NoValidRecords,    // analysis subset is empty
    IoError,           // file missing/unreadable/unwritable
    HeaderMismatch,    // input CSV lacks a required column
    BadSpec,           // synthetic-population spec is inconsistent
    NotRational,       // structure has no exact integer-count form
    MissingRun,        // map export without a completed run file
    InvalidConfig,     // run configuration violates its invariants
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::AllZero: return "AllZero";
        case ErrorCode::EmptySubset: return "EmptySubset";
        case ErrorCode::NegativeEmployees: return "NegativeEmployees";
        case ErrorCode::MalformedCode: return "MalformedCode";
        case ErrorCode::UnmappedLocation: return "UnmappedLocation";
        case ErrorCode::InvalidHierarchy: return "InvalidHierarchy";
        case ErrorCode::EmptyPartition: return "EmptyPartition";
        case ErrorCode::ZeroTotal: return "ZeroTotal";
        case ErrorCode::BadCounts: return "BadCounts";
        case ErrorCode::NoValidRecords: return "NoValidRecords";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::BadSpec: return "BadSpec";
        case ErrorCode::NotRational: return "NotRational";
        case ErrorCode::MissingRun: return "MissingRun";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Error";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

} // namespace synergy
