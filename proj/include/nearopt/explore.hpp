#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "nearopt/geometry.hpp"
#include "nearopt/lp.hpp"

namespace nearopt::explore {

using geometry::Point;

enum class Method { random_uniform, facets, maximal_centre_then_facets };
const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct Convergence {
  double delta_percent = 1.0;
  int window = 10;
};

struct ExploreConfig {
  Method method = Method::maximal_centre_then_facets;
  int iterations = 150;  // after the 2k initial directions
  double theta = 1.0;    // degrees
  double theta_min = 0.01;
  double decay = 0.8;
  std::optional<Convergence> convergence;
  int parallel = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

// A cost-slacked LP and the map from its columns to R^k.
struct ReducedProblem {
  lp::LinearProgram lp;
  lp::VariableIndex index;
  lp::ReductionMap map;
  int cost_row = -1;  // le row holding the cost-slack constraint, -1 if none
};

// Adds the row cost·x <= cost_bound and records where it went.
ReducedProblem make_reduced_problem(const lp::LinearProgram& lp, const lp::VariableIndex& index,
                                    const lp::ReductionMap& map, double cost_bound);

struct IterationRecord {
  int iteration = 0;
  std::string source;  // initial, bootstrap, random, facet, tangent
  Point direction;
  double objective = 0.0;  // d·y at the new point
  double volume = 0.0;     // hull after adding the point
  double radius = 0.0;
  double theta = 0.0;      // filter angle in force when the direction was chosen
  double slack_violation = 0.0;  // relative excess over the cost-slack row
};

enum class Termination { running, budget, converged, exhausted, solver_failure };
const char* to_string(Termination t);

struct ExploreState {
  int dimension = 0;
  std::vector<Point> points;
  geometry::Polytope hull;
  std::vector<Point> used;
  std::vector<IterationRecord> history;
  Termination termination = Termination::running;
  double theta = 1.0;
  // Set when the space was declared flat; the hull then lives in its affine span.
  bool lower_dimensional = false;
  int affine_rank = 0;
  int failed_solves = 0;
  std::string last_source;  // which rule produced the last direction
  std::mt19937_64 rng;
};

// ±e_1, ±e_2, ... in that order.
std::vector<Point> initial_directions(int k);

// Picks the next direction for the configured method, lowering state.theta by
// the decay factor whenever every candidate is filtered. Returns nullopt once
// theta drops below theta_min. Throws DegenerateState on a flat hull that was
// not declared lower-dimensional.
std::optional<Point> next_direction(ExploreState& state, const ExploreConfig& config);

// Runs the initial directions, then up to config.iterations further
// directions. With parallel > 1, directions are chosen in batches of that size
// from the same hull and solved concurrently.
ExploreState approximate_space(const ReducedProblem& problem, const ExploreConfig& config,
                               const lp::SolverOptions& options = {});

// True iff volume and radius each changed by at most delta percent between
// every successive pair among the last `window` iterations; false when fewer
// than `window` iterations exist.
bool convergence_check(const std::vector<IterationRecord>& history, double delta_percent, int window);

// iteration,source,d_0..d_{k-1},objective,volume,radius,theta,slack_violation
void write_trace_csv(std::ostream& out, const ExploreState& state);

// Recomputes the hull of state.points: the full hull when the points span
// R^k, otherwise the hull inside their affine span (points snapped onto it).
// Returns the volume and Chebyshev radius.
std::pair<double, double> rebuild_hull(ExploreState& state);

}  // namespace nearopt::explore
