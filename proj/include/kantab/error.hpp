#pragma once

#include <stdexcept>
#include <string>

namespace kantab {

/// Failure categories. The CLI maps each one to a distinct exit code.
enum class ErrorKind {
  InvalidArgument,
  Parse,
  Validation,
  Guard,
  Covering,
  OracleInconsistency,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace kantab
