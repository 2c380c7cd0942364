#pragma once

#include <stdexcept>
#include <string>

namespace waypoint {

// Base for all domain errors surfaced to the CLI as exit code 1.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct SyntaxError : Error {
  std::string path;
  int line, col;
  SyntaxError(std::string p, int l, int c, const std::string& msg)
      : Error(p + ":" + std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
        path(std::move(p)), line(l), col(c) {}
};

struct ResolveError : Error {
  using Error::Error;
};

struct TypeError : Error {
  using Error::Error;
};

struct AnchorError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct UnknownFunctionError : Error {
  using Error::Error;
};

struct InvalidArgumentError : Error {
  using Error::Error;
};

struct UnreachableCanaryError : Error {
  using Error::Error;
};

struct BackendError : Error {
  using Error::Error;
};

// Bugs in our own machinery (e.g. a solver model that fails concrete replay
// without pruning); never converted into a verdict.
struct InternalError : Error {
  using Error::Error;
};

}  // namespace waypoint
