#include "nearopt/lp.hpp"

namespace nearopt::lp {

Solution solve(const LinearProgram& lp, const SolverOptions& options) {
  switch (options.method) {
    case Method::simplex: return solve_simplex(lp, options);
    case Method::interior_point: return solve_interior_point(lp, options);
    case Method::automatic: break;
  }
  const int rows = lp.num_le() + lp.num_eq();
  if (rows <= options.simplex_max_rows && lp.num_columns() <= options.simplex_max_columns) {
    Solution sol = solve_simplex(lp, options);
    if (sol.status != Status::solver_failure) return sol;
  }
  return solve_interior_point(lp, options);
}

}  // namespace nearopt::lp
