#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "l1kpca/convergence.hpp"

namespace l1kpca {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input data: shapes, non-finite values, invalid parameters.
class InvalidData : public Error {
 public:
  using Error::Error;
};

class ParseError : public InvalidData {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0,
                      std::size_t column = 0);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class SchemaError : public InvalidData {
 public:
  using InvalidData::InvalidData;
};

class InstanceTooLarge : public InvalidData {
 public:
  using InvalidData::InvalidData;
};

/// Numerical failures: the data was well-formed but the computation
/// could not produce a meaningful answer.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what,
                          std::optional<std::size_t> component = std::nullopt)
      : Error(what), component_(component) {}

  std::optional<std::size_t> component() const { return component_; }

 private:
  std::optional<std::size_t> component_;
};

class NumericalFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// c'Kc vanished: the kernel has no variance left along any sign direction.
class DegenerateComponent : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// The solver hit max_iter. Carries the full iteration report.
class NonConvergence : public NumericalError {
 public:
  NonConvergence(const std::string& what, ConvergenceReport report,
                 std::optional<std::size_t> component = std::nullopt)
      : NumericalError(what, component),
        report_(std::make_shared<const ConvergenceReport>(std::move(report))) {}

  const ConvergenceReport& report() const { return *report_; }

 private:
  std::shared_ptr<const ConvergenceReport> report_;
};

}  // namespace l1kpca
