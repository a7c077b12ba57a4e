#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semidisc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, const std::string& detail)
      : Error("syntax error at offset " + std::to_string(offset) + ": " + detail +
              " (expected " + expected + ")"),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Raised when an expression references a name outside its declared variable set.
class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// M*yddot = F has no solution: F has a component in the left kernel of M.
class InconsistentForce : public Error {
 public:
  InconsistentForce(double consistency, const std::string& where)
      : Error("inconsistent force (kernel component " + std::to_string(consistency) + ")" +
              (where.empty() ? std::string() : " " + where)),
        consistency_(consistency) {}
  double consistency() const noexcept { return consistency_; }

 private:
  double consistency_;
};

class SingularLegendre : public Error {
 public:
  using Error::Error;
};

class NewtonDivergence : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

class NotVelocityAffine : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A stepper error raised while advancing a trajectory, tagged with the step
/// index at which it occurred (0 = checks on the initial state).
class StepFailure : public Error {
 public:
  StepFailure(long step, std::string kind, const std::string& detail)
      : Error(kind + " at step " + std::to_string(step) + ": " + detail),
        step_(step),
        kind_(std::move(kind)) {}
  long step() const noexcept { return step_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  long step_;
  std::string kind_;
};

}  // namespace semidisc
