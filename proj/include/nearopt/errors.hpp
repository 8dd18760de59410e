#pragma once

#include <stdexcept>
#include <string>

namespace nearopt {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in nearopt" catch this.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
  using Error::Error;
};

// Missing or malformed input data (series, config files).
class DataError : public Error {
public:
  using Error::Error;
};

// Regression with no usable variation or too few observations.
class DegenerateFit : public Error {
public:
  using Error::Error;
};

class SolverFailure : public Error {
public:
  using Error::Error;
};

// An LP that must be feasible (e.g. a cost-slacked expansion problem) is not.
class Infeasible : public Error {
public:
  using Error::Error;
};

// Exploration state whose hull is lower-dimensional where a full hull is needed.
class DegenerateState : public Error {
public:
  using Error::Error;
};

// Hull input is contained in a proper affine subspace.
class DegenerateHull : public Error {
public:
  DegenerateHull(const std::string& what, int affine_rank)
      : Error(what), affine_rank_(affine_rank) {}
  int affine_rank() const noexcept { return affine_rank_; }

private:
  int affine_rank_;
};

class EmptyPolytope : public Error {
public:
  using Error::Error;
};

class UnboundedPolytope : public Error {
public:
  using Error::Error;
};

// The halfspace system is feasible but has no interior (radius zero).
class FlatPolytope : public Error {
public:
  using Error::Error;
};

class EmptyIntersection : public Error {
public:
  EmptyIntersection(const std::string& what, int first_certifying_index)
      : Error(what), first_certifying_index_(first_certifying_index) {}
  // Index of the first space whose addition made the running intersection empty.
  int first_certifying_index() const noexcept { return first_certifying_index_; }

private:
  int first_certifying_index_;
};

class AllocationInfeasible : public Error {
public:
  AllocationInfeasible(const std::string& what, std::string mode, std::string scenario)
      : Error(what), mode_(std::move(mode)), scenario_(std::move(scenario)) {}
  const std::string& mode() const noexcept { return mode_; }
  const std::string& scenario() const noexcept { return scenario_; }

private:
  std::string mode_;
  std::string scenario_;
};

}  // namespace nearopt
