#pragma once

#include <stdexcept>
#include <string>

namespace distreg {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration, malformed input data, precondition violations.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Filesystem / parsing failures.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what) {}
};

/// Numerical failures: solver non-convergence, factorization breakdown.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(what) {}
};

}  // namespace distreg
