#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <optional>

#include "nearopt/errors.hpp"
#include "nearopt/robust.hpp"

namespace nearopt::robust {

UniformBound uniform_bound(const std::vector<double>& c_opts, double eps) {
  if (c_opts.empty()) throw InvalidArgument("uniform bound needs at least one scenario cost");
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  const double c = *std::max_element(c_opts.begin(), c_opts.end());
  return {c, (1.0 + eps) * c};
}

int most_expensive(const std::vector<double>& c_opts, const std::vector<std::string>& ids) {
  if (c_opts.empty() || c_opts.size() != ids.size()) throw InvalidArgument("costs and ids must be nonempty and aligned");
  int best = 0;
  for (int i = 1; i < static_cast<int>(c_opts.size()); ++i)
    if (c_opts[i] > c_opts[best] || (c_opts[i] == c_opts[best] && ids[i] < ids[best])) best = i;
  return best;
}

namespace {

// Spaces come from LP solutions accurate to about 1e-7 relative, so a ball
// thinner than this fraction of the coordinate scale is treated as flat.
constexpr double kFlatRelativeRadius = 1e-6;

double coordinate_scale(const std::vector<geometry::Polytope>& spaces) {
  double scale = 0.0;
  for (const auto& s : spaces)
    for (const auto& v : s.vertices())
      for (double x : v) scale = std::max(scale, std::abs(x));
  return scale;
}

// Intersection of the systems, or nullopt when it is empty or flat.
std::optional<geometry::Polytope> solid_intersection(const std::vector<geometry::Polytope>& spaces,
                                                     const std::vector<std::vector<geometry::Halfspace>>& systems,
                                                     double scale) {
  try {
    geometry::Polytope p = systems.size() == 1 ? spaces[0] : geometry::intersect_halfspaces(systems);
    if (geometry::chebyshev(p.halfspaces()).radius <= kFlatRelativeRadius * scale) return std::nullopt;
    return p;
  } catch (const EmptyPolytope&) {
  } catch (const FlatPolytope&) {
  }
  return std::nullopt;
}

}  // namespace

Intersection intersect_scenarios(const std::vector<geometry::Polytope>& spaces) {
  if (spaces.empty()) throw InvalidArgument("intersection of no spaces");
  Intersection out;
  std::vector<std::vector<geometry::Halfspace>> systems;
  for (const auto& s : spaces) {
    if (!s.full_dimensional()) throw InvalidArgument("intersection needs full-dimensional spaces");
    systems.push_back(s.halfspaces());
  }
  const double scale = coordinate_scale(spaces);
  auto solid = solid_intersection(spaces, systems, scale);
  if (!solid) {
    // Grow the system one space at a time to name the first that empties it.
    for (std::size_t j = 0; j + 1 < systems.size(); ++j) {
      const std::vector<std::vector<geometry::Halfspace>> prefix(systems.begin(), systems.begin() + j + 1);
      if (!solid_intersection(spaces, prefix, scale))
        throw EmptyIntersection("near-optimal spaces have no common interior; increase eps", static_cast<int>(j));
    }
    throw EmptyIntersection("near-optimal spaces have no common interior; increase eps",
                            static_cast<int>(systems.size()) - 1);
  }
  out.polytope = std::move(*solid);
  const double v = geometry::volume(out.polytope);
  for (const auto& s : spaces) out.volume_ratios.push_back(v / geometry::volume(s));
  return out;
}

Centre robust_centre(const geometry::Polytope& intersection) {
  const auto ch = geometry::chebyshev(intersection.halfspaces());
  return {ch.centre, ch.radius};
}

explore::ReducedProblem joint_reduced_problem(const model::ExpansionProblem& joint, const lp::ReductionMap& map,
                                              double bound) {
  if (!std::isfinite(bound)) throw InvalidArgument("cost bound must be finite");
  explore::ReducedProblem p{joint.lp, joint.index, map, -1};
  const auto& inv = joint.index.investment_columns();
  for (std::size_t b = 0; b < joint.opex_terms.size(); ++b) {
    std::vector<lp::Term> row;
    for (std::size_t slot = 0; slot < inv.size(); ++slot)
      if (joint.capital_costs[slot] != 0.0) row.push_back({inv[slot], joint.capital_costs[slot]});
    row.insert(row.end(), joint.opex_terms[b].begin(), joint.opex_terms[b].end());
    const int r = p.lp.add_le(row, bound);
    if (p.cost_row < 0) p.cost_row = r;
  }
  return p;
}

const char* to_string(AllocationMode m) {
  switch (m) {
    case AllocationMode::exact: return "exact";
    case AllocationMode::conservative: return "conservative";
    case AllocationMode::mean: return "mean";
  }
  return "?";
}

AllocationMode allocation_mode_from_string(const std::string& s) {
  for (AllocationMode m : {AllocationMode::exact, AllocationMode::conservative, AllocationMode::mean})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown allocation mode " + s);
}

namespace {

std::optional<std::vector<double>> solve_fixed(const explore::ReducedProblem& p, const Point& y, double band,
                                               const lp::SolverOptions& options) {
  const auto sol = lp::solve(lp::fix_reduced_point(p.lp, p.map, y, band), options);
  if (!sol.optimal()) return std::nullopt;
  return lp::project_investments(sol.x, p.index);
}

}  // namespace

Allocation allocate(const Point& y, AllocationMode mode, const AllocationInputs& in) {
  for (double v : y)
    if (!std::isfinite(v)) throw InvalidArgument("reduced point must be finite");
  const std::size_t n = in.problems.size();
  if (n == 0 || in.scenario_ids.size() != n || in.c_opts.size() != n)
    throw InvalidArgument("allocation inputs must list every scenario once");
  const double band = in.band >= 0.0 ? in.band : lp::default_fix_tolerance(y);
  const std::string mode_name = to_string(mode);
  Allocation out{mode, {}, {}, {}};

  switch (mode) {
    case AllocationMode::exact: {
      if (!in.joint) throw InvalidArgument("exact allocation needs the joint problem");
      auto x = solve_fixed(*in.joint, y, band, in.options);
      if (!x) {
        // Name a scenario that fails on its own when there is one.
        for (std::size_t i = 0; i < n; ++i)
          if (!solve_fixed(in.problems[i], y, band, in.options))
            throw AllocationInfeasible("exact allocation infeasible", mode_name, in.scenario_ids[i]);
        throw AllocationInfeasible("exact allocation infeasible for the joint problem", mode_name, "joint");
      }
      out.investments = *x;
      out.constituents = {*x};
      out.constituent_ids = {"joint"};
      return out;
    }
    case AllocationMode::conservative: {
      const int i = most_expensive(in.c_opts, in.scenario_ids);
      auto x = solve_fixed(in.problems[i], y, band, in.options);
      if (!x) throw AllocationInfeasible("conservative allocation infeasible", mode_name, in.scenario_ids[i]);
      out.investments = *x;
      out.constituents = {*x};
      out.constituent_ids = {in.scenario_ids[i]};
      return out;
    }
    case AllocationMode::mean: {
      std::vector<std::optional<std::vector<double>>> xs(n);
      std::vector<std::exception_ptr> errors(n);
      const int count = static_cast<int>(n);
#pragma omp parallel for schedule(dynamic) num_threads(in.parallel) if (in.parallel > 1)
      for (int i = 0; i < count; ++i) {
        try {
          xs[i] = solve_fixed(in.problems[i], y, band, in.options);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
      for (auto& e : errors)
        if (e) std::rethrow_exception(e);
      for (std::size_t i = 0; i < n; ++i) {
        if (!xs[i]) throw AllocationInfeasible("mean allocation infeasible", mode_name, in.scenario_ids[i]);
        if (out.investments.empty()) out.investments.assign(xs[i]->size(), 0.0);
        for (std::size_t j = 0; j < xs[i]->size(); ++j) out.investments[j] += (*xs[i])[j] / n;
        out.constituents.push_back(*xs[i]);
        out.constituent_ids.push_back(in.scenario_ids[i]);
      }
      return out;
    }
  }
  throw InvalidArgument("unknown allocation mode");
}

double capex(const std::vector<double>& investments, const std::vector<double>& capital_costs) {
  if (investments.size() != capital_costs.size()) throw InvalidArgument("investments and costs differ in length");
  double c = 0.0;
  for (std::size_t i = 0; i < investments.size(); ++i) c += investments[i] * capital_costs[i];
  return c;
}

std::vector<double> baseline_design(const std::vector<double>& investments, const std::vector<double>& capital_costs,
                                    double target_capex) {
  const double own = capex(investments, capital_costs);
  if (!(own > 0.0)) throw InvalidArgument("baseline needs a design with positive capital cost");
  if (!(target_capex >= 0.0)) throw InvalidArgument("target capex must be nonnegative");
  const double lambda = target_capex / own;
  std::vector<double> out(investments.size());
  for (std::size_t i = 0; i < investments.size(); ++i) out[i] = lambda * investments[i];
  return out;
}

std::vector<explore::ExploreState> explore_scenarios(const std::vector<explore::ReducedProblem>& problems,
                                                     const explore::ExploreConfig& config,
                                                     const lp::SolverOptions& options, int workers) {
  std::vector<explore::ExploreState> out(problems.size());
  std::vector<std::exception_ptr> errors(problems.size());
  const int n = static_cast<int>(problems.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(workers, 1)) if (workers > 1)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = explore::approximate_space(problems[i], config, options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double RobustRun::radius_ratio() const {
  const double cap = c_star * eps / 2.0;
  return cap > 0.0 ? radius / cap : std::numeric_limits<double>::quiet_NaN();
}

double RobustRun::volume_factor() const {
  if (spaces.empty()) return std::numeric_limits<double>::quiet_NaN();
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& s : spaces) {
    const double v = geometry::volume(s);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::quiet_NaN();
}

double RobustRun::scale_per_dimension() const {
  if (labels.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::pow(volume_factor(), 1.0 / labels.size());
}

}  // namespace nearopt::robust
