#pragma once

#include <stdexcept>
#include <string>

namespace kprov {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config errors.
class MalformedIni : public Error {
 public:
  using Error::Error;
};

class InvalidValue : public Error {
 public:
  using Error::Error;
};

class FilterSyntax : public Error {
 public:
  using Error::Error;
};

// A config naming a priority class that the priority table lacks.
class UnknownPriorityClass : public InvalidValue {
 public:
  using InvalidValue::InvalidValue;
};

// Simulation errors.
class IllegalTransition : public Error {
 public:
  using Error::Error;
};

class UnknownNode : public Error {
 public:
  using Error::Error;
};

/// Raised by scenario and JSON loaders; `path()` names the offending field,
/// e.g. "workload[2].time".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& message)
      : Error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Raised when a simulation invariant is breached mid-run. `event()` holds the
/// JSONL rendering of the last event recorded before the breach was detected.
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& message, std::string event)
      : Error(message), event_(std::move(event)) {}

  const std::string& event() const { return event_; }

 private:
  std::string event_;
};

}  // namespace kprov
