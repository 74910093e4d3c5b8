#pragma once

#include <stdexcept>
#include <string>

namespace sqleval {

// Base for all library errors so callers can catch one type at the boundary.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// dataset
struct MalformedRecord : Error {
    using Error::Error;
};
struct DuplicateId : Error {
    using Error::Error;
};
struct DatabaseUnreadable : Error {
    using Error::Error;
};

// executor
struct RaggedRows : Error {
    using Error::Error;
};

// grading
struct MissingRequiredSize : Error {
    using Error::Error;
};
struct GoldExecutionFailure : Error {
    using Error::Error;
};

// reconcile
struct NoVotableGroup : Error {
    using Error::Error;
};

// rlvr
struct GroupTooSmall : Error {
    using Error::Error;
};

// metrics
struct ParseError : Error {
    using Error::Error;
};
struct AllUnparseable : Error {
    using Error::Error;
};

// clients
struct ClientError : Error {
    ClientError(const std::string& what, bool transient_error = false)
        : Error(what), transient(transient_error) {}
    bool transient;
};

// harness
struct MissingPrediction : Error {
    using Error::Error;
};
struct MissingPrice : Error {
    using Error::Error;
};

}  // namespace sqleval
