#pragma once

#include <stdexcept>
#include <string>

namespace dsmt {

// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs violate a structural contract (shapes, flow constraints, ranges).
class StructuralError : public Error {
public:
    using Error::Error;
};

// Malformed or ambiguous on-disk data.
class DataError : public Error {
public:
    using Error::Error;
};

// Non-finite values, divergence, or a broken numerical invariant.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (unknown key, bad value).
class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace dsmt
