#pragma once

#include <stdexcept>
#include <string>

namespace kgpr {

enum class ErrorKind {
  Io,
  Parse,
  Schema,
  Config,
  Infeasible,
  Degenerate,
  Generator,
  Mismatch,
  Empty,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "io";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Config: return "config";
    case ErrorKind::Infeasible: return "infeasible";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Generator: return "generator";
    case ErrorKind::Mismatch: return "mismatch";
    case ErrorKind::Empty: return "empty";
  }
  return "unknown";
}

/// Every failure raised by the library. The kind is the category reported by
/// the command-line front end.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace kgpr
