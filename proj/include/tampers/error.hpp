#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tampers {

enum class ErrorKind {
  EmptyText,
  InvalidSubstitution,
  IoError,
  EmptyLexicon,
  DimensionMismatch,
  ParseError,
  TransportError,
  ProtocolError,
  DegenerateText,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so callers (the eval
/// harness, the CLI) can route it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace tampers
