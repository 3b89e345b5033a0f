#pragma once

#include <stdexcept>
#include <string>

namespace dhnet {

// Base of every error the toolkit throws. kind() is the machine-readable tag
// the CLI puts in its error JSON.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_argument"; }
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  const char* kind() const noexcept override { return "parse_error"; }
  long line() const noexcept { return line_; }

 private:
  long line_;
};

class TrainingAbort : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "training_abort"; }
};

class UndefinedMetrics : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "undefined_metrics"; }
};

class IncompatibleArtifact : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "incompatible_artifact"; }
};

class MissingTool : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "missing_tool"; }
};

class ExternalToolFailed : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "external_tool_failed"; }
};

}  // namespace dhnet
