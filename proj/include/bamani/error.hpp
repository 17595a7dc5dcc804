#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bamani {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input data (CSV parse failures, unknown features, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Graph invariant violations: self loops, unknown nodes, cycles.
class GraphError : public Error {
 public:
  using Error::Error;
};

// A PDAG that admits no consistent DAG extension. `witness` lists the nodes of
// a cycle that blocks the extension.
class NotExtendableError : public GraphError {
 public:
  NotExtendableError(const std::string& what, std::vector<std::string> witness)
      : GraphError(what), witness_(std::move(witness)) {}

  const std::vector<std::string>& witness() const noexcept { return witness_; }

 private:
  std::vector<std::string> witness_;
};

// Least-squares design matrix without full column rank.
class SingularDesignError : public DataError {
 public:
  using DataError::DataError;
};

// Statistical test that cannot be evaluated: singular conditioning set or
// non-positive degrees of freedom.
class DegenerateTestError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration. `field` is a dotted path to the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Wraps a failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error("[" + stage + "] " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace bamani
