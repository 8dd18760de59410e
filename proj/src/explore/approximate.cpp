#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "nearopt/errors.hpp"
#include "nearopt/explore.hpp"

namespace nearopt::explore {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kRankTol = 1e-6;
constexpr int kMaxConsecutiveFailures = 3;

struct AffineSpan {
  VectorXd origin;
  MatrixXd basis;       // k x rank
  MatrixXd complement;  // k x (k - rank)
  int rank = 0;
};

AffineSpan affine_span(const std::vector<Point>& points, int k) {
  AffineSpan s;
  const int n = static_cast<int>(points.size());
  s.origin = VectorXd::Zero(k);
  for (const auto& p : points) s.origin += Eigen::Map<const VectorXd>(p.data(), k);
  if (n > 0) s.origin /= n;
  MatrixXd c(k, std::max(n, 1));
  c.setZero();
  for (int i = 0; i < n; ++i) c.col(i) = Eigen::Map<const VectorXd>(points[i].data(), k) - s.origin;
  const double scale = c.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) {
    s.basis = MatrixXd(k, 0);
    s.complement = MatrixXd::Identity(k, k);
    return s;
  }
  Eigen::JacobiSVD<MatrixXd> svd(c / scale, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTol * sv[0]) ++s.rank;
  s.basis = svd.matrixU().leftCols(s.rank);
  s.complement = svd.matrixU().rightCols(k - s.rank);
  return s;
}

struct Outcome {
  bool ok = false;
  lp::Status status = lp::Status::solver_failure;
  Point y;
  double objective = 0.0;
  double slack_violation = 0.0;
  std::string message;
};

Outcome solve_direction(const ReducedProblem& p, const Point& d, const lp::SolverOptions& options) {
  Outcome out;
  const lp::Solution sol = lp::solve(lp::set_reduced_objective(p.lp, p.map, d), options);
  out.status = sol.status;
  out.message = sol.message;
  if (!sol.optimal()) return out;
  out.ok = true;
  out.y = lp::aggregate(lp::project_investments(sol.x, p.index), p.map);
  for (std::size_t i = 0; i < d.size(); ++i) out.objective += d[i] * out.y[i];
  if (p.cost_row >= 0) {
    const double rhs = p.lp.le().rhs(p.cost_row);
    const double act = p.lp.le().activity(p.cost_row, sol.x);
    out.slack_violation = std::max(0.0, act - rhs) / std::max(1.0, std::abs(rhs));
  }
  return out;
}

// Solves every direction; P > 1 fans out over OpenMP threads, P = 1 is the
// serial reference path.
std::vector<Outcome> solve_batch(const ReducedProblem& p, const std::vector<Point>& dirs, int parallel,
                                 const lp::SolverOptions& options) {
  std::vector<Outcome> out(dirs.size());
  if (parallel <= 1) {
    for (std::size_t i = 0; i < dirs.size(); ++i) out[i] = solve_direction(p, dirs[i], options);
    return out;
  }
  std::vector<std::exception_ptr> errors(dirs.size());
  const int n = static_cast<int>(dirs.size());
#pragma omp parallel for schedule(dynamic) num_threads(parallel)
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = solve_direction(p, dirs[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

class Runner {
public:
  Runner(const ReducedProblem& p, const ExploreConfig& c, const lp::SolverOptions& o, ExploreState& s)
      : problem_(p), config_(c), options_(o), state_(s) {}

  // Adds the outcomes in order; returns false once failures force an abort.
  bool merge(const std::vector<Point>& dirs, const std::vector<Outcome>& results, const std::string& source,
             const std::vector<double>& thetas) {
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const Outcome& r = results[i];
      if (!r.ok) {
        if (r.status == lp::Status::infeasible) throw Infeasible("cost-slacked problem is infeasible");
        if (r.status == lp::Status::unbounded)
          throw UnboundedPolytope("reduced near-optimal space is unbounded; every extendable element needs a cost");
        ++state_.failed_solves;
        if (++consecutive_failures_ >= kMaxConsecutiveFailures) {
          state_.termination = Termination::solver_failure;
          return false;
        }
        continue;
      }
      consecutive_failures_ = 0;
      state_.points.push_back(r.y);
      const auto [volume, radius] = rebuild_hull(state_);
      IterationRecord rec;
      rec.iteration = static_cast<int>(state_.history.size());
      rec.source = source.empty() ? sources_.at(i) : source;
      rec.direction = dirs[i];
      rec.objective = r.objective;
      rec.volume = volume;
      rec.radius = radius;
      rec.theta = thetas.empty() ? state_.theta : thetas[i];
      rec.slack_violation = r.slack_violation;
      state_.history.push_back(std::move(rec));
    }
    return true;
  }

  bool run_directions(const std::vector<Point>& dirs, const std::string& source,
                      const std::vector<double>& thetas = {}) {
    for (const auto& d : dirs) state_.used.push_back(d);
    return merge(dirs, solve_batch(problem_, dirs, config_.parallel, options_), source, thetas);
  }

  // Optimises along random directions orthogonal to the current affine span
  // until the points span R^k or the attempts run out.
  bool bootstrap() {
    const int k = state_.dimension;
    AffineSpan span = affine_span(state_.points, k);
    const int attempts = 2 * (k - span.rank);
    std::normal_distribution<double> g;
    for (int a = 0; a < attempts && span.rank < k; ++a) {
      VectorXd z(k);
      for (int i = 0; i < k; ++i) z[i] = g(state_.rng);
      VectorXd d = span.complement * (span.complement.transpose() * z);
      if (d.norm() < 1e-12) continue;
      d.normalize();
      const Point plus(d.data(), d.data() + k);
      Point minus(k);
      for (int i = 0; i < k; ++i) minus[i] = -plus[i];
      if (!run_directions({plus, minus}, "bootstrap")) return false;
      span = affine_span(state_.points, k);
    }
    if (span.rank < k) {
      state_.lower_dimensional = true;
      rebuild_hull(state_);
    }
    return true;
  }

  std::vector<std::string> sources_;

private:
  const ReducedProblem& problem_;
  const ExploreConfig& config_;
  const lp::SolverOptions& options_;
  ExploreState& state_;
  int consecutive_failures_ = 0;
};

}  // namespace

ReducedProblem make_reduced_problem(const lp::LinearProgram& lp, const lp::VariableIndex& index,
                                    const lp::ReductionMap& map, double cost_bound) {
  ReducedProblem p{lp::apply_cost_slack(lp, cost_bound), index, map, -1};
  p.cost_row = p.lp.num_le() - 1;
  return p;
}

std::pair<double, double> rebuild_hull(ExploreState& state) {
  const int k = state.dimension;
  const AffineSpan span = affine_span(state.points, k);
  state.affine_rank = span.rank;
  bool full = false;
  if (span.rank == k) {
    try {
      state.hull = geometry::convex_hull(state.points);
      full = true;
    } catch (const DegenerateHull&) {
    }
  }
  if (!full) {
    std::vector<Point> snapped;
    snapped.reserve(state.points.size());
    for (const auto& p : state.points) {
      const VectorXd v = Eigen::Map<const VectorXd>(p.data(), k) - span.origin;
      const VectorXd s = span.origin + span.basis * (span.basis.transpose() * v);
      snapped.emplace_back(s.data(), s.data() + k);
    }
    state.hull = geometry::flat_hull(snapped);
    return {0.0, 0.0};
  }
  double radius = 0.0;
  try {
    radius = geometry::chebyshev(state.hull.halfspaces()).radius;
  } catch (const Error&) {
  }
  return {geometry::volume(state.hull), radius};
}

ExploreState approximate_space(const ReducedProblem& problem, const ExploreConfig& config,
                               const lp::SolverOptions& options) {
  config.validate();
  const int k = problem.map.dimension();
  ExploreState state;
  state.dimension = k;
  state.theta = config.theta;
  state.rng.seed(config.seed);
  Runner runner(problem, config, options, state);

  if (!runner.run_directions(initial_directions(k), "initial")) return state;
  if (state.affine_rank < k && !runner.bootstrap()) return state;

  int done = 0;
  while (done < config.iterations) {
    if (config.convergence && done >= config.convergence->window &&
        convergence_check(state.history, config.convergence->delta_percent, config.convergence->window)) {
      state.termination = Termination::converged;
      return state;
    }
    // Every direction of a batch comes from the same hull.
    const int width = std::min(config.parallel, config.iterations - done);
    std::vector<Point> batch;
    std::vector<double> thetas;
    runner.sources_.clear();
    for (int i = 0; i < width; ++i) {
      auto d = next_direction(state, config);
      if (!d) break;
      batch.push_back(*d);
      thetas.push_back(state.theta);
      runner.sources_.push_back(state.last_source);
      state.used.push_back(*d);
    }
    if (batch.empty()) {
      state.termination = Termination::exhausted;
      return state;
    }
    state.used.resize(state.used.size() - batch.size());
    if (!runner.run_directions(batch, "", thetas)) return state;
    done += static_cast<int>(batch.size());
  }
  state.termination = Termination::budget;
  return state;
}

void write_trace_csv(std::ostream& out, const ExploreState& state) {
  out << "iteration,source";
  for (int i = 0; i < state.dimension; ++i) out << ",d_" << i;
  out << ",objective,volume,radius,theta,slack_violation\n";
  const auto precision = out.precision(17);
  for (const auto& r : state.history) {
    out << r.iteration << ',' << r.source;
    for (double v : r.direction) out << ',' << v;
    out << ',' << r.objective << ',' << r.volume << ',' << r.radius << ',' << r.theta << ',' << r.slack_violation << '\n';
  }
  out.precision(precision);
}

}  // namespace nearopt::explore
