#include <algorithm>
#include <cmath>

#include "nearopt/errors.hpp"
#include "nearopt/explore.hpp"

namespace nearopt::explore {

namespace {

constexpr int kRandomDraws = 64;

// Facet indices by decreasing measure, ties broken lexicographically on the normal.
std::vector<int> facets_by_measure(const geometry::Polytope& hull) {
  const auto& f = hull.facets();
  double largest = 0.0;
  for (const auto& x : f) largest = std::max(largest, x.measure);
  const double tie = 1e-12 * largest;
  std::vector<int> order(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(f[a].measure - f[b].measure) > tie) return f[a].measure > f[b].measure;
    return f[a].normal < f[b].normal;
  });
  return order;
}

// Tangent facets of the Chebyshev ball by decreasing dual value.
std::vector<int> tangent_by_dual(const geometry::Polytope& hull) {
  geometry::ChebyshevResult ch;
  try {
    ch = geometry::chebyshev(hull.halfspaces());
  } catch (const Error&) {
    return {};
  }
  std::vector<int> order = ch.tangent;
  const auto& f = hull.facets();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (ch.duals[a] != ch.duals[b]) return ch.duals[a] > ch.duals[b];
    return f[a].normal < f[b].normal;
  });
  return order;
}

bool passes(const Point& d, const ExploreState& s) { return geometry::min_angle_to_set(d, s.used) >= s.theta; }

std::optional<Point> first_passing(const std::vector<int>& order, const ExploreState& s) {
  for (int i : order) {
    const Point& n = s.hull.facets()[i].normal;
    if (passes(n, s)) return n;
  }
  return std::nullopt;
}

Point random_unit(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  for (;;) {
    Point d(k);
    double norm = 0.0;
    for (double& v : d) {
      v = g(rng);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-12) continue;
    for (double& v : d) v /= norm;
    return d;
  }
}

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::random_uniform: return "random-uniform";
    case Method::facets: return "facets";
    case Method::maximal_centre_then_facets: return "maximal-centre-then-facets";
  }
  return "?";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::random_uniform, Method::facets, Method::maximal_centre_then_facets})
    if (s == to_string(m)) return m;
  throw InvalidArgument("unknown direction method " + s);
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::running: return "running";
    case Termination::budget: return "budget";
    case Termination::converged: return "converged";
    case Termination::exhausted: return "exhausted";
    case Termination::solver_failure: return "solver-failure";
  }
  return "?";
}

void ExploreConfig::validate() const {
  if (!(theta_min > 0.0 && theta_min <= theta && theta <= 180.0))
    throw InvalidArgument("angle thresholds must satisfy 0 < theta_min <= theta <= 180");
  if (!(decay > 0.0 && decay < 1.0)) throw InvalidArgument("decay must lie in (0,1)");
  if (iterations < 1) throw InvalidArgument("iteration budget must be at least 1");
  if (parallel < 1) throw InvalidArgument("parallel width must be at least 1");
  if (convergence && (convergence->window < 1 || !(convergence->delta_percent >= 0.0)))
    throw InvalidArgument("convergence needs a window >= 1 and delta >= 0");
}

std::vector<Point> initial_directions(int k) {
  if (k < 2) throw InvalidArgument("exploration needs k >= 2");
  std::vector<Point> out;
  for (int i = 0; i < k; ++i)
    for (double sign : {1.0, -1.0}) {
      Point d(k, 0.0);
      d[i] = sign;
      out.push_back(d);
    }
  return out;
}

std::optional<Point> next_direction(ExploreState& state, const ExploreConfig& config) {
  if (!state.hull.full_dimensional() && !state.lower_dimensional)
    throw DegenerateState("hull is not full-dimensional");
  const int k = state.dimension;
  while (state.theta >= config.theta_min) {
    switch (config.method) {
      case Method::random_uniform:
        for (int i = 0; i < kRandomDraws; ++i) {
          Point d = random_unit(state.rng, k);
          if (passes(d, state)) {
            state.last_source = "random";
            return d;
          }
        }
        break;
      case Method::maximal_centre_then_facets:
        if (state.hull.full_dimensional()) {
          if (auto d = first_passing(tangent_by_dual(state.hull), state)) {
            state.last_source = "tangent";
            return d;
          }
        }
        [[fallthrough]];
      case Method::facets:
        if (auto d = first_passing(facets_by_measure(state.hull), state)) {
          state.last_source = "facet";
          return d;
        }
        break;
    }
    state.theta *= config.decay;
  }
  return std::nullopt;
}

bool convergence_check(const std::vector<IterationRecord>& history, double delta_percent, int window) {
  const int n = static_cast<int>(history.size());
  if (window < 1 || n < window) return false;
  auto within = [&](double prev, double cur) {
    if (prev == cur) return true;
    if (prev == 0.0) return false;
    return std::abs(cur - prev) / std::abs(prev) * 100.0 <= delta_percent;
  };
  for (int i = n - window + 1; i < n; ++i)
    if (!within(history[i - 1].volume, history[i].volume) || !within(history[i - 1].radius, history[i].radius))
      return false;
  return true;
}

}  // namespace nearopt::explore
