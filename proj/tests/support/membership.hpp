#pragma once

#include <vector>

#include "nearopt/errors.hpp"
#include "nearopt/lp.hpp"

namespace nearopt::testing {

// L1 distance from y to the reduced image of {x feasible, cost <= bound}.
// Elastic form: sigma(x) + s+ - s- = y with the cost as a constraint, so the
// feasible region keeps an interior even when y is a vertex of the image.
inline double distance_to_reduced_space(const lp::LinearProgram& base, const lp::ReductionMap& map,
                                        const std::vector<double>& y, double bound) {
  lp::LinearProgram p = lp::apply_cost_slack(base, bound);
  for (int c = 0; c < p.num_columns(); ++c) p.set_cost(c, 0.0);
  p.set_offset(0.0);
  for (int i = 0; i < map.dimension(); ++i) {
    std::vector<lp::Term> terms;
    for (const auto& m : map.groups()[i].members) terms.push_back({m.column, m.weight});
    terms.push_back({p.add_column(1.0, 0.0, lp::kInf), 1.0});
    terms.push_back({p.add_column(1.0, 0.0, lp::kInf), -1.0});
    p.add_eq(terms, y[i]);
  }
  const auto sol = lp::solve(p);
  if (!sol.optimal()) throw SolverFailure("membership LP not solved: " + sol.message);
  return sol.objective;
}

}  // namespace nearopt::testing
