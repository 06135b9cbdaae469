#pragma once

#include <stdexcept>
#include <string>

namespace divrec {

/// Base class for all divrec errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

/// Invalid configuration or argument (bad sizes, unknown variants, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input file; the message carries the line
/// number or offending value.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Vector or matrix dimensions do not match.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Requested more items than the kernel rank supports.
class RankError : public Error {
public:
    using Error::Error;
};

/// Numerical degeneracy detected during basis contraction.
class DegeneracyError : public Error {
public:
    using Error::Error;
};

/// Cosine similarity requested against a zero vector.
class ZeroVectorError : public Error {
public:
    using Error::Error;
};

}  // namespace divrec
