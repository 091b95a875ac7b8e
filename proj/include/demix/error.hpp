#pragma once

#include <stdexcept>
#include <string>

namespace demix {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition of a pure operation was violated (box outside image,
/// mismatched dimensions, ...).
class ContractViolation : public Error {
public:
  using Error::Error;
};

/// Malformed structured text. `offset` is the byte offset reported by the
/// underlying parser.
class ParseError : public Error {
public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Well-formed input whose content is out of range.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Invalid augmentation configuration detected at startup.
class ConfigError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace demix
