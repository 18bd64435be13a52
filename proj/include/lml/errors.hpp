#pragma once

#include <stdexcept>
#include <string>

namespace lml {

// Base class for every error the toolkit raises on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Matrix/vector dimension mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
public:
    using Error::Error;
};

// A documented precondition of an operation was violated.
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Malformed text input (CSV, JSON config).
class ParseError : public Error {
public:
    using Error::Error;
};

// Malformed binary input (bad magic, version, digest, truncation).
class FormatError : public Error {
public:
    using Error::Error;
};

// Filesystem/network failure.
class IoError : public Error {
public:
    using Error::Error;
};

// Model payload failed a consistency check (non-finite parameter, digest).
class IntegrityError : public Error {
public:
    using Error::Error;
};

// Metric undefined for the given inputs (e.g. single-class AUC).
class MetricError : public Error {
public:
    using Error::Error;
};

}  // namespace lml
