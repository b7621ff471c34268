#pragma once

#include <stdexcept>
#include <string>

namespace varcomp {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An atom depends on the differentiation variable but has no symbolic rule for it.
class MissingDerivativeRule : public Error {
 public:
  MissingDerivativeRule(std::string atom, std::string variable)
      : Error("atom '" + atom + "' has no derivative rule with respect to " + variable),
        atom_(std::move(atom)) {}
  const std::string& atom() const noexcept { return atom_; }

 private:
  std::string atom_;
};

/// A total derivative would produce a jet coordinate above the chart's order cap.
class OrderOverflow : public Error {
 public:
  using Error::Error;
};

/// An atom that depends on a scaled field has no homothety weight declared.
class UnknownWeight : public Error {
 public:
  explicit UnknownWeight(std::string atom)
      : Error("atom '" + atom + "' has no declared homothety weight"), atom_(std::move(atom)) {}
  const std::string& atom() const noexcept { return atom_; }

 private:
  std::string atom_;
};

/// The fiber homotopy integral diverges at u = 0.
class DivergentHomotopy : public Error {
 public:
  DivergentHomotopy(std::string what, double weight) : Error(std::move(what)), weight_(weight) {}
  double weight() const noexcept { return weight_; }

 private:
  double weight_;
};

/// Numeric detection of a divergent homotopy integrand; carries the estimated exponent.
class NonFiniteIntegrand : public DivergentHomotopy {
 public:
  using DivergentHomotopy::DivergentHomotopy;
};

class SyntaxError : public Error {
 public:
  SyntaxError(int line, int column, std::string expected, std::string found)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": expected " + expected +
              ", found " + found),
        line_(line),
        column_(column),
        expected_(std::move(expected)) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  int line_;
  int column_;
  std::string expected_;
};

class SemanticError : public Error {
 public:
  using Error::Error;
};

class IncompletePoint : public Error {
 public:
  using Error::Error;
};

class AtomEvalFailure : public Error {
 public:
  using Error::Error;
};

class SingularMetric : public Error {
 public:
  using Error::Error;
};

}  // namespace varcomp
