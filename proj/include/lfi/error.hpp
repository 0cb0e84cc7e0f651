#pragma once

#include <stdexcept>
#include <string>

namespace lfi {

enum class ErrorKind {
  Index,
  Shape,
  Validation,
  Config,
  Io,
  Solver,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; the kind selects the CLI exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace lfi
