#pragma once

#include <stdexcept>
#include <string>

namespace cure {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad arguments or preconditions supplied by the caller.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data (files, datasets, specs).
class DataError : public Error {
public:
    using Error::Error;
};

/// Factorizations or solvers that could not produce a usable result.
class NumericalError : public Error {
public:
    using Error::Error;
};

} // namespace cure
