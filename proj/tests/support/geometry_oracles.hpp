#pragma once

// Brute-force references for the geometry module. None of these call into
// the library's hull or Chebyshev code.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "nearopt/geometry.hpp"
#include "support/tableau_oracle.hpp"

namespace nearopt::testing {

using geometry::Halfspace;
using geometry::Point;

// Membership of q in conv(points) as a feasibility LP over convex weights,
// decided by the textbook tableau.
inline bool in_hull_oracle(const std::vector<Point>& points, const Point& q) {
  const int k = static_cast<int>(q.size());
  lp::LinearProgram p;
  for (std::size_t i = 0; i < points.size(); ++i) p.add_column(0.0, 0.0, lp::kInf);
  std::vector<lp::Term> row;
  for (int r = 0; r < k; ++r) {
    row.clear();
    for (std::size_t i = 0; i < points.size(); ++i) row.push_back({static_cast<int>(i), points[i][r]});
    p.add_eq(row, q[r]);
  }
  row.clear();
  for (std::size_t i = 0; i < points.size(); ++i) row.push_back({static_cast<int>(i), 1.0});
  p.add_eq(row, 1.0);
  return tableau_oracle(p).status == lp::Status::optimal;
}

inline Point uniform_in_ball(std::mt19937_64& rng, int k) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Point p(k);
  double len = 0.0;
  for (double& v : p) {
    v = g(rng);
    len += v * v;
  }
  const double radius = std::pow(u(rng), 1.0 / k) / std::sqrt(len);
  for (double& v : p) v *= radius;
  return p;
}

inline double unit_ball_volume(int k) {
  return std::pow(M_PI, k / 2.0) / std::tgamma(k / 2.0 + 1.0);
}

// Rejection-sampling estimate of vol(conv(points)) for points inside the unit ball.
inline double mc_hull_volume_in_ball(const std::vector<Point>& points, int samples,
                                     std::uint64_t seed) {
  const int k = static_cast<int>(points[0].size());
  std::mt19937_64 rng(seed);
  int hits = 0;
  for (int s = 0; s < samples; ++s)
    if (in_hull_oracle(points, uniform_in_ball(rng, k))) ++hits;
  return unit_ball_volume(k) * hits / samples;
}

// Every feasible intersection of k boundary hyperplanes.
inline std::vector<Point> brute_force_vertices(const std::vector<Halfspace>& hs, double tol = 1e-9) {
  const int m = static_cast<int>(hs.size());
  const int k = static_cast<int>(hs[0].normal.size());
  std::vector<Point> out;
  std::vector<int> pick(k);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == k) {
      Eigen::MatrixXd a(k, k);
      Eigen::VectorXd b(k);
      for (int i = 0; i < k; ++i) {
        for (int r = 0; r < k; ++r) a(i, r) = hs[pick[i]].normal[r];
        b[i] = hs[pick[i]].offset;
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
      if (lu.rank() < k) return;
      const Eigen::VectorXd y = lu.solve(b);
      for (const auto& h : hs) {
        double act = -h.offset;
        for (int r = 0; r < k; ++r) act += h.normal[r] * y[r];
        if (act > tol * std::max(1.0, std::abs(h.offset))) return;
      }
      Point p(y.data(), y.data() + k);
      for (const auto& q : out) {
        double d = 0.0;
        for (int r = 0; r < k; ++r) d = std::max(d, std::abs(q[r] - p[r]));
        if (d <= 1e-7) return;
      }
      out.push_back(std::move(p));
      return;
    }
    for (int j = start; j < m; ++j) {
      pick[depth] = j;
      rec(j + 1, depth + 1);
    }
  };
  rec(0, 0);
  return out;
}

// Every point of `a` has a partner in `b` within tol and vice versa.
inline bool same_point_set(const std::vector<Point>& a, const std::vector<Point>& b, double tol) {
  auto covered = [&](const std::vector<Point>& x, const std::vector<Point>& y) {
    for (const auto& p : x) {
      bool found = false;
      for (const auto& q : y) {
        double d = 0.0;
        for (std::size_t r = 0; r < p.size(); ++r) d = std::max(d, std::abs(p[r] - q[r]));
        if (d <= tol) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

inline std::vector<Halfspace> box(const Point& lo, const Point& hi) {
  const int k = static_cast<int>(lo.size());
  std::vector<Halfspace> out;
  for (int r = 0; r < k; ++r) {
    Point e(k, 0.0);
    e[r] = 1.0;
    out.push_back({e, hi[r]});
    e[r] = -1.0;
    out.push_back({e, -lo[r]});
  }
  return out;
}

// Random simplex-shaped system: k+1 halfspaces whose normals positively span R^k.
inline std::vector<Halfspace> random_simplex_system(std::mt19937_64& rng, int k, double shift) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  std::vector<Point> normals(k + 1, Point(k, 0.0));
  Point sum(k, 0.0);
  for (int i = 0; i < k; ++i) {
    for (int r = 0; r < k; ++r) normals[i][r] = g(rng) * 0.3 + (r == i ? 1.0 : 0.0);
    for (int r = 0; r < k; ++r) sum[r] += normals[i][r];
  }
  for (int r = 0; r < k; ++r) normals[k][r] = -sum[r] * u(rng);
  std::vector<Halfspace> out;
  for (const auto& n : normals) {
    double b = u(rng);
    for (int r = 0; r < k; ++r) b += n[r] * shift;
    out.push_back({n, b});
  }
  return out;
}

}  // namespace nearopt::testing
