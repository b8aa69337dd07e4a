#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dosp {

// Base class for every error raised by the library. `kind()` is a stable
// machine-readable tag used by the CLI when it prints an error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class InvalidEdge : public Error {
 public:
  explicit InvalidEdge(const std::string& what) : Error("InvalidEdge", what) {}
};

class DisconnectedGraph : public Error {
 public:
  explicit DisconnectedGraph(const std::string& what)
      : Error("DisconnectedGraph", what) {}
};

class OutOfRange : public Error {
 public:
  explicit OutOfRange(const std::string& what) : Error("OutOfRange", what) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what)
      : Error("DimensionMismatch", what) {}
};

class HorizonExceeded : public Error {
 public:
  explicit HorizonExceeded(const std::string& what)
      : Error("HorizonExceeded", what) {}
};

class NonFinite : public Error {
 public:
  NonFinite(std::size_t step, const std::string& what)
      : Error("NonFinite", what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what)
      : Error("InvalidArgument", what) {}
};

class ScenarioError : public Error {
 public:
  explicit ScenarioError(const std::string& what)
      : Error("ScenarioError", what) {}
};

class CsvSchemaError : public Error {
 public:
  explicit CsvSchemaError(const std::string& what)
      : Error("CsvSchemaError", what) {}
};

class BoundHypothesisViolated : public Error {
 public:
  explicit BoundHypothesisViolated(const std::string& what)
      : Error("BoundHypothesisViolated", what) {}
};

class NoFeasiblePoint : public Error {
 public:
  NoFeasiblePoint(double min_violation, const std::string& what)
      : Error("NoFeasiblePoint", what), min_violation_(min_violation) {}
  double min_violation() const noexcept { return min_violation_; }

 private:
  double min_violation_;
};

}  // namespace dosp
