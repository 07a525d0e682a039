#ifndef TAVIE_ERRORS_HPP
#define TAVIE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tavie {

// Input outside the mathematical domain of an operation (bad quantile level,
// response outside the support, xi below the singularity floor, ...).
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A declared invariant of a value type failed (non-PD covariance, b <= 0, ...).
class InvariantError : public std::runtime_error {
public:
  explicit InvariantError(const std::string& what) : std::runtime_error(what) {}
};

// Floating point breakdown inside an algorithm (failed Cholesky, ELBO decrease).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed tabular input; carries 1-based row/column position when known.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, long row = -1, long column = -1)
      : std::runtime_error(what), row_(row), column_(column) {}
  long row() const { return row_; }
  long column() const { return column_; }

private:
  long row_;
  long column_;
};

// Grid integration rejected because probability mass leaks past the grid edge.
class QuadratureError : public std::runtime_error {
public:
  explicit QuadratureError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace tavie

#endif  // TAVIE_ERRORS_HPP
