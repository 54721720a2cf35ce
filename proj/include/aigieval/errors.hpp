#pragma once

#include <stdexcept>
#include <string>

namespace aigi {

// Base for all engine errors. The CLI maps these onto exit codes:
// input/format problems -> 2, coverage problems (missing uids) -> 3.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed document structure: missing or mistyped field. Message carries a path.
class SchemaError : public Error {
public:
    using Error::Error;
};

// Well-typed but semantically invalid content (degenerate polygon, unknown
// category, duplicate record, confidence outside {0, 0.5, 1}, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class RleError : public Error {
public:
    using Error::Error;
};

class EmptyRegion : public Error {
public:
    using Error::Error;
};

class NonFiniteValue : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class NonStochasticRow : public Error {
public:
    using Error::Error;
};

class EmptyClass : public Error {
public:
    using Error::Error;
};

class RealImage : public Error {
public:
    using Error::Error;
};

class NoScoredInstances : public Error {
public:
    using Error::Error;
};

// Binary file container problems (bad magic, truncated payload).
class FormatError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Coverage errors: the evaluation cannot proceed because predictions and
// ground truth do not line up. Distinct base so the CLI can map exit code 3.
class CoverageError : public Error {
public:
    using Error::Error;
};

class MissingPrediction : public CoverageError {
public:
    using CoverageError::CoverageError;
};

class MissingImage : public CoverageError {
public:
    using CoverageError::CoverageError;
};

class UnknownUid : public CoverageError {
public:
    using CoverageError::CoverageError;
};

}  // namespace aigi
