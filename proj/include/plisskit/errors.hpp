#pragma once

#include <stdexcept>
#include <string>

namespace plisskit {

// Base of all domain errors thrown by the library. The CLI maps subtrees of
// this hierarchy to exit codes, so new errors should derive from one of the
// three branches below rather than from Error directly.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// --- map / cocycle / analysis domain errors (CLI exit code 3) ---

struct MapError : Error {
    using Error::Error;
};

struct NonInvertibleParameters : MapError {
    using MapError::MapError;
};

struct DegenerateSplitting : MapError {
    using MapError::MapError;
};

struct EmptySequence : MapError {
    using MapError::MapError;
};

struct BadOrdering : MapError {
    using MapError::MapError;
};

struct NotConverged : MapError {
    using MapError::MapError;
};

struct OrbitTooShort : MapError {
    using MapError::MapError;
};

struct PreconditionNotMet : MapError {
    using MapError::MapError;
};

// --- constant-scheduler errors (CLI exit code 4) ---

struct SchedulerError : Error {
    using Error::Error;
};

struct TTooSmall : SchedulerError {
    using SchedulerError::SchedulerError;
};

struct SOutOfRange : SchedulerError {
    using SchedulerError::SchedulerError;
};

struct SideConditionViolated : SchedulerError {
    using SchedulerError::SchedulerError;
};

// --- filesystem / serialization errors (CLI exit code 5) ---

struct IoError : Error {
    using Error::Error;
};

}  // namespace plisskit
