#pragma once

#include <stdexcept>

namespace vmdaug {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed an invalid argument or configuration value.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Input data violates a numeric invariant (NaN/Inf, degenerate signal).
class DataError : public Error {
public:
    using Error::Error;
};

/// File structure is malformed (ragged rows, empty file, bad JSON).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Unknown or missing class-label token.
class LabelError : public Error {
public:
    using Error::Error;
};

/// A numerical fit failed (rank-deficient system, no usable modes).
class FitError : public Error {
public:
    using Error::Error;
};

/// Training could not proceed (single-class data, non-finite gradients).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// Internal invariant violated; indicates a bug, not bad input.
class InternalError : public Error {
public:
    using Error::Error;
};

} // namespace vmdaug
