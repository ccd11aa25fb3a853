#pragma once

#include <stdexcept>
#include <string>

namespace qkdrisk {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad configuration or invalid arguments (CLI exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public Error {
public:
    using Error::Error;
};

// Filesystem failures (CLI exit code 3).
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace qkdrisk
