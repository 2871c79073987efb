#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace floodplan {

/// Base for every error raised by the engine. `kind()` is the stable,
/// machine-readable category written into CLI/HTTP error payloads.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(what), line_(line) {}
  const char* kind() const noexcept override { return "parse_error"; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class UnsupportedFormat : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "unsupported_format"; }
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string path = {})
      : Error(what), path_(std::move(path)) {}
  const char* kind() const noexcept override { return "config_error"; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class GeometryError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "geometry_error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "usage_error"; }
};

class NotFound : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "not_found"; }
};

/// Compare-and-set failure on a versioned resource.
class Conflict : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "conflict"; }
};

class ConservationError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "conservation_error"; }
};

class SolverDivergence : public Error {
 public:
  SolverDivergence(std::size_t cell, double time)
      : Error("solver produced a non-finite value at cell " +
              std::to_string(cell) + ", t=" + std::to_string(time) + " s"),
        cell_(cell),
        time_(time) {}
  const char* kind() const noexcept override { return "solver_divergence"; }
  std::size_t cell() const noexcept { return cell_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t cell_;
  double time_;
};

}  // namespace floodplan
