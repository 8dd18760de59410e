#pragma once

#include <string>
#include <vector>

#include "nearopt/errors.hpp"
#include "nearopt/explore.hpp"
#include "nearopt/model.hpp"
#include "nearopt/robust.hpp"
#include "nearopt/scenario.hpp"
#include "support/fixtures.hpp"

namespace nearopt::testing {

// A few perturbed scenarios of one small network with everything needed for
// exploration and allocation at a given eps.
struct Suite {
  model::Network network;
  model::CostAssumptions costs;
  std::vector<scenario::Scenario> scenarios;
  std::vector<std::string> ids;
  std::vector<model::ExpansionProblem> problems;
  std::vector<double> c_opts;
  model::ExpansionProblem joint;
  lp::ReductionMap map;
};

inline Suite make_suite(int buses, int steps, int scenarios, std::uint64_t seed,
                        const std::vector<model::GroupSpec>& groups) {
  Suite s;
  const auto sys = small_system(buses, steps, seed);
  s.network = sys.network;
  s.costs = test_costs();
  s.scenarios = scenario::generate_scenarios(sys.scenario, scenarios, seed + 1);
  for (const auto& sc : s.scenarios) {
    s.ids.push_back(sc.id);
    s.problems.push_back(model::build_expansion_lp(s.network, sc, 1.0, s.costs));
    const auto sol = lp::solve(s.problems.back().lp);
    if (!sol.optimal()) throw SolverFailure("suite scenario not optimal");
    s.c_opts.push_back(sol.objective);
  }
  s.joint = model::build_joint_expansion_lp(s.network, s.scenarios, 1.0, s.costs);
  s.map = model::reduction_map(s.problems[0], groups);
  return s;
}

inline std::vector<explore::ReducedProblem> slacked(const Suite& s, double bound) {
  std::vector<explore::ReducedProblem> out;
  for (const auto& p : s.problems) out.push_back(explore::make_reduced_problem(p.lp, p.index, s.map, bound));
  return out;
}

// Total cost of scenario i with the investments pinned. Solver output meets
// rows only to ~1e-7, so capacities get 1e-7 relative headroom; the cost
// effect is of the same order.
inline double cost_with_investments(const Suite& s, int i, const std::vector<double>& investments) {
  lp::LinearProgram prog = s.problems[i].lp;
  const auto& cols = s.problems[i].index.investment_columns();
  for (std::size_t slot = 0; slot < cols.size(); ++slot) {
    const double v = std::max(0.0, investments[slot]) * (1 + 1e-7) + 1e-7;
    prog.set_bounds(cols[slot], v, v);
  }
  const auto sol = lp::solve(prog);
  if (!sol.optimal()) return lp::kInf;
  return sol.objective;
}

}  // namespace nearopt::testing
