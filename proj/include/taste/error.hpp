#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taste {

enum class ErrorKind {
  Io,
  Format,
  Tree,
  Alignment,
  Range,
  Dimension,
  Numeric,
  Corruption,
  Config,
  Model,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Tree: return "tree error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Range: return "range error";
    case ErrorKind::Dimension: return "dimension error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Corruption: return "corruption error";
    case ErrorKind::Config: return "config error";
    case ErrorKind::Model: return "model error";
  }
  return "error";
}

/// Every failure raised by the library. The kind drives the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace taste
