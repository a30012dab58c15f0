#pragma once

#include <stdexcept>
#include <string>

namespace thinshield {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument or precondition violation (bad dimension, radius out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A query point does not lie inside the meshed region.
class OutOfDomain : public Error {
public:
    using Error::Error;
};

/// A quantity that must be positive (H, a mass, a norm) vanished.
class Degenerate : public Error {
public:
    using Error::Error;
};

/// Malformed file or configuration.
class FormatError : public Error {
public:
    using Error::Error;
};

} // namespace thinshield
