#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearopt/explore.hpp"
#include "nearopt/geometry.hpp"
#include "nearopt/lp.hpp"
#include "nearopt/model.hpp"

namespace nearopt::robust {

using geometry::Point;

struct UniformBound {
  double c_star = 0.0;
  double bound = 0.0;  // (1 + eps) c_star
};

UniformBound uniform_bound(const std::vector<double>& c_opts, double eps);

// Index of the most expensive scenario; ties go to the lowest id.
int most_expensive(const std::vector<double>& c_opts, const std::vector<std::string>& ids);

struct Intersection {
  geometry::Polytope polytope;
  std::vector<double> volume_ratios;  // volume(intersection) / volume(space i)
};

// Throws EmptyIntersection carrying the index of the first space whose
// addition leaves no interior.
Intersection intersect_scenarios(const std::vector<geometry::Polytope>& spaces);

struct Centre {
  Point y;
  double radius = 0.0;
};

Centre robust_centre(const geometry::Polytope& intersection);

// Joint problem with one cost-slack row per scenario block:
// capex + opex_b <= bound for every b.
explore::ReducedProblem joint_reduced_problem(const model::ExpansionProblem& joint, const lp::ReductionMap& map,
                                              double bound);

enum class AllocationMode { exact, conservative, mean };
const char* to_string(AllocationMode m);
AllocationMode allocation_mode_from_string(const std::string& s);

struct AllocationInputs {
  std::vector<std::string> scenario_ids;
  std::vector<double> c_opts;
  std::vector<explore::ReducedProblem> problems;  // slacked single-scenario problems
  const explore::ReducedProblem* joint = nullptr;  // required for exact
  double band = -1.0;                              // < 0: default_fix_tolerance(y)
  int parallel = 1;
  lp::SolverOptions options;
};

struct Allocation {
  AllocationMode mode;
  std::vector<double> investments;  // slot order of the investment vector
  // Investment vectors of the constituent solves (one per scenario for mean).
  std::vector<std::vector<double>> constituents;
  std::vector<std::string> constituent_ids;
};

// Throws AllocationInfeasible naming the mode and the failing scenario.
Allocation allocate(const Point& y, AllocationMode mode, const AllocationInputs& in);

// lambda * x with lambda chosen so that capex equals target_capex.
std::vector<double> baseline_design(const std::vector<double>& investments, const std::vector<double>& capital_costs,
                                    double target_capex);

double capex(const std::vector<double>& investments, const std::vector<double>& capital_costs);

// Approximates every scenario's space. With workers > 1 the scenarios run
// concurrently; results keep scenario order.
std::vector<explore::ExploreState> explore_scenarios(const std::vector<explore::ReducedProblem>& problems,
                                                     const explore::ExploreConfig& config,
                                                     const lp::SolverOptions& options, int workers);

struct RobustRun {
  std::vector<std::string> scenario_ids;
  std::vector<double> c_opts;
  double c_star = 0.0;
  double eps = 0.0;
  std::vector<std::string> labels;  // reduced coordinates
  std::vector<geometry::Polytope> spaces;
  std::optional<geometry::Polytope> intersection;
  std::vector<double> volume_ratios;
  Point centre;
  double radius = 0.0;
  std::vector<std::string> elements;  // investment slot names
  std::vector<double> capital_costs;
  std::map<std::string, std::vector<double>> allocations;

  // r / (c* eps / 2); the bound is not asserted, only reported.
  double radius_ratio() const;
  // max_i volume_i / min_i volume_i over the per-scenario spaces.
  double volume_factor() const;
  // volume_factor^(1/k).
  double scale_per_dimension() const;
};

std::string to_json(const RobustRun& run);
RobustRun robust_run_from_json(const std::string& text);

// element,<mode>,<mode>... one row per investment element.
void write_capacity_csv(std::ostream& out, const RobustRun& run);

}  // namespace nearopt::robust
