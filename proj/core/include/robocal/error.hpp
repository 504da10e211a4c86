// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace robocal {

/// Base class for all robocal errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Axis extraction requested for a rotation too close to identity.
class NearIdentityError : public Error {
 public:
  using Error::Error;
};

/// Geometric input is degenerate (zero vector, collinear point set, ...).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// A text input (pose log, scenario, CSV) could not be parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& origin, int line, const std::string& what)
      : Error(origin + ":" + std::to_string(line) + ": " + what),
        origin_(origin),
        line_(line) {}

  const std::string& origin() const { return origin_; }
  int line() const { return line_; }

 private:
  std::string origin_;
  int line_;
};

/// The collected motions do not constrain all six extrinsic parameters.
/// missing() lists the unconstrained parameter names.
class InsufficientMotionError : public Error {
 public:
  InsufficientMotionError(std::vector<std::string> missing, const std::string& what)
      : Error(what), missing_(std::move(missing)) {}

  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

}  // namespace robocal
