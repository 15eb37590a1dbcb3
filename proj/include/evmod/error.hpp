#pragma once

#include <stdexcept>
#include <string>

namespace evmod {

// Base type for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem-level failures (missing file, unwritable path).
struct IoError : Error {
    using Error::Error;
};

// Malformed input data; message names the file and line/offset when known.
struct FormatError : Error {
    using Error::Error;
};

// Bad configuration values or unknown configuration keys.
struct ConfigError : Error {
    using Error::Error;
};

// Precondition violations on operation arguments.
struct InvalidArgument : Error {
    using Error::Error;
};

}  // namespace evmod
