#pragma once

#include <stdexcept>
#include <string>

namespace pqlab {

enum class ErrorKind {
  invalid_argument,  // bad problem data or configuration
  evaluation,        // a source term could not be evaluated
  solver,            // nonlinear or scalar solve failed
  io,
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

}  // namespace pqlab
