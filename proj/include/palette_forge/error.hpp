#pragma once

#include <stdexcept>
#include <string>

namespace palette_forge {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or unreadable file content (bad magic, truncated data, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Filesystem and decoder failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace palette_forge
