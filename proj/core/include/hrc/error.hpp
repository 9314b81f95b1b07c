#pragma once

#include <stdexcept>
#include <string>

namespace hrc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Caller passed a value outside an operation's domain.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// A file was readable but its format is unsupported or malformed.
class FormatError : public Error {
public:
    using Error::Error;
};

/// An .hrc stream failed validation while parsing or entropy decoding.
class CorruptStream : public Error {
public:
    using Error::Error;
};

} // namespace hrc
