#pragma once

#include <stdexcept>
#include <string>

namespace restruct {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data: schema, dataset, structure files.
class DataError : public Error {
public:
    using Error::Error;
};

/// Chat backend failed to produce a usable response (transport or format).
class BackendError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or command-line usage.
class UsageError : public Error {
public:
    using Error::Error;
};

} // namespace restruct
