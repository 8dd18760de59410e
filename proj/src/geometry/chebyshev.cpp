#include <algorithm>
#include <cmath>

#include "nearopt/errors.hpp"
#include "nearopt/geometry.hpp"
#include "nearopt/lp.hpp"

namespace nearopt::geometry {

namespace {

// Radius cap in normalised units; reaching it means the system is unbounded.
constexpr double kRadiusCap = 1e6;
constexpr double kTangentTol = 1e-9;

// Halfspaces with unit normals and offsets divided by a common scale.
struct Normalised {
  int k = 0;
  double scale = 1.0;
  std::vector<Point> a;
  std::vector<double> b;
  std::vector<int> source;  // index in the caller's list
};

Normalised normalise(const std::vector<Halfspace>& hs) {
  if (hs.empty()) throw InvalidArgument("empty halfspace system");
  Normalised out;
  out.k = static_cast<int>(hs[0].normal.size());
  double scale = 0.0;
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const auto& h = hs[j];
    if (static_cast<int>(h.normal.size()) != out.k)
      throw InvalidArgument("halfspaces of mixed dimension");
    double len = 0.0;
    for (double v : h.normal) len += v * v;
    len = std::sqrt(len);
    if (!std::isfinite(len) || !std::isfinite(h.offset))
      throw InvalidArgument("non-finite halfspace");
    if (len == 0.0) {
      if (h.offset < 0.0) throw EmptyPolytope("halfspace 0 <= " + std::to_string(h.offset));
      continue;
    }
    Point a(out.k);
    for (int r = 0; r < out.k; ++r) a[r] = h.normal[r] / len;
    out.a.push_back(std::move(a));
    out.b.push_back(h.offset / len);
    out.source.push_back(static_cast<int>(j));
    scale = std::max(scale, std::abs(h.offset / len));
  }
  if (out.a.empty()) throw UnboundedPolytope("no halfspace restricts the space");
  out.scale = scale > 0.0 ? scale : 1.0;
  for (double& b : out.b) b /= out.scale;
  return out;
}

lp::SolverOptions simplex_options() {
  lp::SolverOptions o;
  o.method = lp::Method::simplex;
  o.feasibility_tol = 1e-10;
  o.optimality_tol = 1e-10;
  return o;
}

}  // namespace

ChebyshevResult chebyshev(const std::vector<Halfspace>& halfspaces) {
  const Normalised n = normalise(halfspaces);
  const int m = static_cast<int>(n.a.size());
  // Dual of  max r  s.t.  a_j·y + r <= b_j,  0 <= r <= cap:
  //   min b·lambda + cap·mu  s.t.  sum lambda_j a_j = 0,  sum lambda_j + mu >= 1.
  lp::LinearProgram dual;
  for (int j = 0; j < m; ++j) dual.add_column(n.b[j], 0.0, lp::kInf);
  const int mu = dual.add_column(kRadiusCap, 0.0, lp::kInf);
  std::vector<lp::Term> row;
  for (int r = 0; r < n.k; ++r) {
    row.clear();
    for (int j = 0; j < m; ++j)
      if (n.a[j][r] != 0.0) row.push_back({j, n.a[j][r]});
    dual.add_eq(row, 0.0);
  }
  row.clear();
  for (int j = 0; j < m; ++j) row.push_back({j, -1.0});
  row.push_back({mu, -1.0});
  dual.add_le(row, -1.0);

  const lp::Solution sol = lp::solve(dual, simplex_options());
  if (sol.status == lp::Status::unbounded || sol.status == lp::Status::infeasible)
    throw EmptyPolytope("halfspace system has no feasible point");
  if (!sol.optimal()) throw SolverFailure("Chebyshev LP: " + sol.message);

  const double r = sol.le_duals[0];
  if (r >= kRadiusCap * (1.0 - 1e-9)) throw UnboundedPolytope("inscribed radius is unbounded");

  ChebyshevResult out;
  out.centre.resize(n.k);
  for (int i = 0; i < n.k; ++i) out.centre[i] = -sol.eq_duals[i] * n.scale;
  out.radius = std::max(0.0, r) * n.scale;
  out.duals.assign(halfspaces.size(), 0.0);
  for (int j = 0; j < m; ++j) {
    out.duals[n.source[j]] = sol.x[j];
    double slack = n.b[j] - r;
    for (int i = 0; i < n.k; ++i) slack += n.a[j][i] * sol.eq_duals[i];
    if (slack <= kTangentTol || sol.x[j] > kTangentTol) out.tangent.push_back(n.source[j]);
  }
  return out;
}

SupportResult support(const std::vector<Halfspace>& halfspaces, const Point& direction) {
  const Normalised n = normalise(halfspaces);
  if (static_cast<int>(direction.size()) != n.k) throw InvalidArgument("direction dimension");
  const int m = static_cast<int>(n.a.size());
  // Dual of  max d·y  s.t.  a_j·y <= b_j:  min b·lambda  s.t.  sum lambda_j a_j = d.
  lp::LinearProgram dual;
  for (int j = 0; j < m; ++j) dual.add_column(n.b[j], 0.0, lp::kInf);
  std::vector<lp::Term> row;
  for (int r = 0; r < n.k; ++r) {
    row.clear();
    for (int j = 0; j < m; ++j)
      if (n.a[j][r] != 0.0) row.push_back({j, n.a[j][r]});
    dual.add_eq(row, direction[r]);
  }
  const lp::Solution sol = lp::solve(dual, simplex_options());
  if (sol.status == lp::Status::infeasible)
    throw UnboundedPolytope("support function is unbounded in this direction");
  if (sol.status == lp::Status::unbounded) throw EmptyPolytope("halfspace system has no feasible point");
  if (!sol.optimal()) throw SolverFailure("support LP: " + sol.message);
  SupportResult out;
  out.value = sol.objective * n.scale;
  out.argmax.resize(n.k);
  for (int i = 0; i < n.k; ++i) out.argmax[i] = -sol.eq_duals[i] * n.scale;
  return out;
}

Polytope intersect_halfspaces(const std::vector<std::vector<Halfspace>>& systems) {
  if (systems.empty()) throw InvalidArgument("intersect_halfspaces needs at least one system");
  std::vector<Halfspace> all;
  for (const auto& s : systems) all.insert(all.end(), s.begin(), s.end());
  const ChebyshevResult ball = chebyshev(all);
  const Normalised n = normalise(all);
  if (ball.radius <= 1e-9 * n.scale) throw FlatPolytope("intersection has no interior");
  const int k = n.k;

  // Polar dual about the centre, in units of the radius: each halfspace
  // a·z <= beta with beta >= 1 maps to the point a / beta.
  std::vector<Point> dual_points;
  dual_points.reserve(n.a.size());
  for (std::size_t j = 0; j < n.a.size(); ++j) {
    double beta = n.b[j] * n.scale;
    for (int i = 0; i < k; ++i) beta -= n.a[j][i] * ball.centre[i];
    beta /= ball.radius;
    Point p(k);
    for (int i = 0; i < k; ++i) p[i] = n.a[j][i] / beta;
    dual_points.push_back(std::move(p));
  }
  Polytope dual_hull;
  try {
    dual_hull = convex_hull(dual_points);
  } catch (const DegenerateHull&) {
    throw UnboundedPolytope("halfspace normals do not span the space");
  }
  std::vector<Point> vertices;
  for (const auto& f : dual_hull.facets()) {
    if (f.offset <= 1e-12) throw UnboundedPolytope("intersection has a recession direction");
    Point v(k);
    for (int i = 0; i < k; ++i) v[i] = ball.centre[i] + ball.radius * f.normal[i] / f.offset;
    vertices.push_back(std::move(v));
  }
  Polytope out = convex_hull(vertices);
  out.set_provenance(Provenance::from_halfspaces);
  return out;
}

}  // namespace nearopt::geometry
