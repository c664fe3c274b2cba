#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace resto {

/// Machine-readable error category. The service maps these onto HTTP codes.
enum class ErrorCode {
    malformed,        // unparsable input
    invalid_argument, // out-of-range index, bad value in an API call
    schema,           // document parsed but violates its schema
    infeasible,       // action/observation not applicable in the current state
    not_found,        // unknown session, bus, ...
    limit_exceeded,   // state-count cap
    unreachable_goal  // a non-goal state without actions
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::malformed: return "malformed";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::schema: return "schema_violation";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::limit_exceeded: return "limit_exceeded";
    case ErrorCode::unreachable_goal: return "unreachable_goal";
    }
    return "unknown";
}

/**
 * Library exception. Carries a category and, for document errors, the
 * JSON-pointer path of the offending field (empty when not applicable).
 */
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::string field = {})
        : std::runtime_error(message), code_(code), field_(std::move(field)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& field() const noexcept { return field_; }

private:
    ErrorCode code_;
    std::string field_;
};

} // namespace resto
