#pragma once

#include <stdexcept>
#include <string>

namespace optour {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A model operation was called outside its mathematical domain
/// (e.g. non-positive altitude, pose outside the camera's admissible cone).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A scenario admits no feasible image-taking waypoint for some target.
class InfeasibleScenarioError : public Error {
 public:
  using Error::Error;
};

/// A numerical solve failed beyond recovery.
class SolverError : public Error {
 public:
  using Error::Error;
};

/// File, parse, or schema problem.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A result document does not match the scenario it claims to describe.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace optour
