#include "tampers/error.hpp"

namespace tampers {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::InvalidSubstitution: return "InvalidSubstitution";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::EmptyLexicon: return "EmptyLexicon";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::TransportError: return "TransportError";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::DegenerateText: return "DegenerateText";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Error";
}

}  // namespace tampers
