#pragma once

#include <stdexcept>
#include <string>

namespace ioss {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model or grid text. Line and column are 1-based; 0 means
/// "not attached to a particular position".
class ParseError : public Error {
 public:
  enum class Kind { Syntax, UndeclaredVariable, DimensionMismatch };

  ParseError(Kind kind, int line, int column, const std::string& message);

  Kind kind() const { return kind_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  Kind kind_;
  int line_;
  int column_;
};

/// Evaluation left the domain of a primitive (sqrt of a negative, division by
/// zero, overflow). `expression()` names the offending output, e.g. "f2".
class DomainError : public Error {
 public:
  DomainError(std::string expression, const std::string& message);

  const std::string& expression() const { return expression_; }

 private:
  std::string expression_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class CertificateError : public Error {
 public:
  using Error::Error;
};

/// Requested sampling period is outside (0, tau1). `binding()` names the
/// constraint of the tau1 minimum that was active.
class TransferError : public Error {
 public:
  TransferError(std::string binding, const std::string& message);

  const std::string& binding() const { return binding_; }

 private:
  std::string binding_;
};

}  // namespace ioss
