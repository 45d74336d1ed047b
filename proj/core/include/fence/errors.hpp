#pragma once

#include <stdexcept>
#include <string>

namespace fence {

// Base class for every error thrown by this library.
class FenceError : public std::runtime_error {
public:
    explicit FenceError(const std::string& what) : std::runtime_error(what) {}
};

// Endpoint unreachable, HTTP 5xx/429, connection drop. Retryable.
class TransportError : public FenceError {
public:
    using FenceError::FenceError;
};

// A configured per-role call cap was hit; the call was not issued.
class BudgetExceeded : public FenceError {
public:
    using FenceError::FenceError;
};

// A model completion did not contain the expected structure.
class ParseFailure : public FenceError {
public:
    using FenceError::FenceError;
};

// Embedding backend returned inconsistent vector widths (or a zero vector).
class DimensionMismatch : public FenceError {
public:
    using FenceError::FenceError;
};

// Strict scripted mock saw a request it has no entry for.
class ScriptMiss : public FenceError {
public:
    using FenceError::FenceError;
};

// Every configured evidence provider errored or contributed nothing.
class AllProvidersFailed : public FenceError {
public:
    using FenceError::FenceError;
};

// A benchmark subset is missing one of the two classes.
class DegenerateDataset : public FenceError {
public:
    using FenceError::FenceError;
};

// Invalid configuration, rejected before any backend call.
class ConfigError : public FenceError {
public:
    using FenceError::FenceError;
};

// Filesystem failure while reading inputs or emitting outputs.
class IoError : public FenceError {
public:
    using FenceError::FenceError;
};

// A documented operation precondition was violated by the caller.
class PreconditionError : public FenceError {
public:
    using FenceError::FenceError;
};

}  // namespace fence
