#pragma once

#include <stdexcept>
#include <string>

namespace skewmorph {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input text is not well-formed (bad JSON, wrong value type).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Input is well-formed but violates the expected layout or domain.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operation.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Skew-normal parameters put (nearly) all mass outside the length range.
class DegenerateTargetError : public DomainError {
public:
    using DomainError::DomainError;
};

/// A mutated packet does not parse as a record sequence.
class FramingError : public Error {
public:
    using Error::Error;
};

/// Records parse but fragment ranges of one source packet do not tile it.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// A mutation plan is inconsistent with its flow or the length budget.
class PlanValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace skewmorph
