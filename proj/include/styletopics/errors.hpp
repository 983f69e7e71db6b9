#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace styletopics {

// Errors caused by bad input data or configuration. The CLI maps these to
// exit code 2; anything else escaping a subcommand is an internal error.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public InputError {
 public:
  using InputError::InputError;
};

class UnsupportedVersionError : public InputError {
 public:
  explicit UnsupportedVersionError(std::uint16_t version)
      : InputError("unsupported activation stream version " + std::to_string(version)),
        version_(version) {}

  std::uint16_t version() const noexcept { return version_; }

 private:
  std::uint16_t version_;
};

class TruncationError : public InputError {
 public:
  explicit TruncationError(std::uint64_t offset)
      : InputError("activation stream truncated at byte offset " + std::to_string(offset)),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace styletopics
