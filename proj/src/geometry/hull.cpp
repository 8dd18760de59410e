#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "nearopt/errors.hpp"
#include "nearopt/geometry.hpp"

namespace nearopt::geometry {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Scaled-coordinate tolerances.
constexpr double kDedupTol = 1e-9;
constexpr double kVisibleTol = 1e-10;
constexpr double kCoplanarTol = 1e-9;

struct SimplexFacet {
  std::vector<int> v;   // k point ids
  std::vector<int> nb;  // nb[i] is the facet across the ridge opposite v[i]
  VectorXd n;
  double o = 0.0;
  std::vector<int> outside;
  bool alive = true;
  int stamp = -1;
};

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

// Unit normal of the hyperplane through k points, oriented away from `inside`.
void plane_through(const std::vector<VectorXd>& pts, const std::vector<int>& ids,
                   const VectorXd& inside, VectorXd& n, double& o) {
  const int k = static_cast<int>(inside.size());
  MatrixXd edges(k, k - 1);
  for (int i = 1; i < k; ++i) edges.col(i - 1) = pts[ids[i]] - pts[ids[0]];
  Eigen::HouseholderQR<MatrixXd> qr(edges);
  MatrixXd q = qr.householderQ();
  n = q.col(k - 1);
  o = n.dot(pts[ids[0]]);
  if (n.dot(inside) > o) {
    n = -n;
    o = -o;
  }
}

// (k-1)-measure of the simplex spanned by the rows of `w`.
double simplex_measure(const std::vector<Point>& w) {
  const int m = static_cast<int>(w.size()) - 1;
  if (m == 0) return 1.0;
  const int k = static_cast<int>(w[0].size());
  MatrixXd e(k, m);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < k; ++r) e(r, i) = w[i + 1][r] - w[0][r];
  Eigen::HouseholderQR<MatrixXd> qr(e);
  double det = 1.0;
  for (int i = 0; i < m; ++i) det *= qr.matrixQR()(i, i);
  return std::abs(det) / factorial(m);
}

struct Scaled {
  std::vector<VectorXd> pts;
  VectorXd lo;
  VectorXd span;
  std::vector<int> origin;  // original index of each kept point
};

Scaled scale_and_dedup(const std::vector<Point>& points, int k) {
  Scaled s;
  s.lo = VectorXd::Constant(k, std::numeric_limits<double>::infinity());
  VectorXd hi = VectorXd::Constant(k, -std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != k) throw InvalidArgument("points of mixed dimension");
    for (int r = 0; r < k; ++r) {
      if (!std::isfinite(p[r])) throw InvalidArgument("non-finite point coordinate");
      s.lo[r] = std::min(s.lo[r], p[r]);
      hi[r] = std::max(hi[r], p[r]);
    }
  }
  s.span = hi - s.lo;
  for (int r = 0; r < k; ++r)
    if (!(s.span[r] > 0.0)) s.span[r] = 1.0;

  std::vector<VectorXd> all(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    all[i] = VectorXd(k);
    for (int r = 0; r < k; ++r) all[i][r] = (points[i][r] - s.lo[r]) / s.span[r];
  }
  // Sort lexicographically, then sweep for duplicates along the first axis.
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int r = 0; r < k; ++r)
      if (all[a][r] != all[b][r]) return all[a][r] < all[b][r];
    return a < b;
  });
  std::vector<int> kept;
  for (int idx : order) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (all[idx][0] - all[*it][0] > kDedupTol) break;
      if ((all[idx] - all[*it]).lpNorm<Eigen::Infinity>() <= kDedupTol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(idx);
  }
  // Restore input order so results do not depend on the sort.
  std::sort(kept.begin(), kept.end());
  for (int idx : kept) {
    s.pts.push_back(all[idx]);
    s.origin.push_back(idx);
  }
  return s;
}

// Greedy affinely independent subset; fewer than k+1 ids means rank deficiency.
std::vector<int> initial_simplex(const std::vector<VectorXd>& pts, int k) {
  std::vector<int> chosen;
  if (pts.empty()) return chosen;
  int first = 0;
  for (int i = 1; i < static_cast<int>(pts.size()); ++i)
    if (pts[i][0] < pts[first][0]) first = i;
  chosen.push_back(first);
  std::vector<VectorXd> basis;
  while (static_cast<int>(chosen.size()) <= k) {
    double best = kDedupTol;
    int pick = -1;
    VectorXd pick_dir;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
      VectorXd r = pts[i] - pts[first];
      for (const auto& b : basis) r -= r.dot(b) * b;
      const double d = r.norm();
      if (d > best) {
        best = d;
        pick = i;
        pick_dir = r / d;
      }
    }
    if (pick < 0) break;
    chosen.push_back(pick);
    basis.push_back(pick_dir);
  }
  return chosen;
}

struct Quickhull {
  const std::vector<VectorXd>& pts;
  int k;
  VectorXd inside;
  std::vector<SimplexFacet> facets;
  int stamp = 0;

  Quickhull(const std::vector<VectorXd>& p, int dim) : pts(p), k(dim) {}

  double dist(const SimplexFacet& f, int p) const { return f.n.dot(pts[p]) - f.o; }

  int make_facet(std::vector<int> v) {
    SimplexFacet f;
    f.v = std::move(v);
    f.nb.assign(k, -1);
    plane_through(pts, f.v, inside, f.n, f.o);
    facets.push_back(std::move(f));
    return static_cast<int>(facets.size()) - 1;
  }

  void assign(const std::vector<int>& candidates, const std::vector<int>& targets) {
    for (int p : candidates) {
      for (int f : targets) {
        if (dist(facets[f], p) > kVisibleTol) {
          facets[f].outside.push_back(p);
          break;
        }
      }
    }
  }

  // Connects ridges of facets listed in `ids` that share k-1 vertices.
  void link(const std::vector<int>& ids) {
    std::map<std::vector<int>, std::pair<int, int>> open;
    for (int f : ids) {
      for (int slot = 0; slot < k; ++slot) {
        if (facets[f].nb[slot] >= 0) continue;
        std::vector<int> ridge;
        ridge.reserve(k - 1);
        for (int j = 0; j < k; ++j)
          if (j != slot) ridge.push_back(facets[f].v[j]);
        std::sort(ridge.begin(), ridge.end());
        auto it = open.find(ridge);
        if (it == open.end()) {
          open.emplace(std::move(ridge), std::make_pair(f, slot));
        } else {
          facets[f].nb[slot] = it->second.first;
          facets[it->second.first].nb[it->second.second] = f;
          open.erase(it);
        }
      }
    }
  }

  void run(const std::vector<int>& simplex) {
    inside = VectorXd::Zero(k);
    for (int id : simplex) inside += pts[id];
    inside /= static_cast<double>(simplex.size());

    std::vector<int> first;
    for (int skip = 0; skip <= k; ++skip) {
      std::vector<int> v;
      for (int i = 0; i <= k; ++i)
        if (i != skip) v.push_back(simplex[i]);
      first.push_back(make_facet(std::move(v)));
    }
    link(first);
    std::vector<int> rest;
    std::vector<char> in_simplex(pts.size(), 0);
    for (int id : simplex) in_simplex[id] = 1;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
      if (!in_simplex[i]) rest.push_back(i);
    assign(rest, first);

    std::vector<int> pending(first.rbegin(), first.rend());
    while (!pending.empty()) {
      const int f0 = pending.back();
      pending.pop_back();
      if (!facets[f0].alive || facets[f0].outside.empty()) continue;

      int apex = facets[f0].outside[0];
      double far = dist(facets[f0], apex);
      for (int p : facets[f0].outside) {
        const double d = dist(facets[f0], p);
        if (d > far) {
          far = d;
          apex = p;
        }
      }

      // Visible region by flood fill from f0.
      ++stamp;
      std::vector<int> visible{f0};
      facets[f0].stamp = stamp;
      for (std::size_t q = 0; q < visible.size(); ++q) {
        for (int nb : facets[visible[q]].nb) {
          if (facets[nb].stamp == stamp) continue;
          if (dist(facets[nb], apex) > kVisibleTol) {
            facets[nb].stamp = stamp;
            visible.push_back(nb);
          }
        }
      }

      std::vector<int> created;
      std::vector<int> orphans;
      for (int f : visible) {
        for (int slot = 0; slot < k; ++slot) {
          const int nb = facets[f].nb[slot];
          if (facets[nb].stamp == stamp) continue;
          std::vector<int> v = facets[f].v;
          v[slot] = apex;
          const int nf = make_facet(std::move(v));
          facets[nf].nb[slot] = nb;
          for (int& back : facets[nb].nb)
            if (back == f) back = nf;
          created.push_back(nf);
        }
      }
      link(created);
      for (int f : visible) {
        facets[f].alive = false;
        for (int p : facets[f].outside)
          if (p != apex) orphans.push_back(p);
        facets[f].outside.clear();
      }
      assign(orphans, created);
      for (int nf : created)
        if (!facets[nf].outside.empty()) pending.push_back(nf);
    }
  }
};

}  // namespace

Polytope convex_hull(const std::vector<Point>& points) {
  if (points.empty()) throw DegenerateHull("empty point set", -1);
  const int k = static_cast<int>(points[0].size());
  if (k < 2 || k > 8) throw InvalidArgument("convex_hull supports dimensions 2..8");
  Scaled s = scale_and_dedup(points, k);
  const std::vector<int> simplex = initial_simplex(s.pts, k);
  if (static_cast<int>(simplex.size()) < k + 1)
    throw DegenerateHull("points span an affine subspace of dimension " +
                             std::to_string(simplex.size() - 1),
                         static_cast<int>(simplex.size()) - 1);

  Quickhull qh(s.pts, k);
  qh.run(simplex);

  std::vector<int> alive;
  for (int f = 0; f < static_cast<int>(qh.facets.size()); ++f)
    if (qh.facets[f].alive) alive.push_back(f);

  // Vertices in input order.
  std::vector<int> vertex_of(s.pts.size(), -1);
  std::vector<int> used;
  for (int f : alive)
    for (int id : qh.facets[f].v) used.push_back(id);
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::vector<Point> vertices;
  for (int id : used) {
    vertex_of[id] = static_cast<int>(vertices.size());
    vertices.push_back(points[s.origin[id]]);
  }

  // Merge adjacent coplanar simplices into reported facets.
  std::map<int, int> local;
  for (std::size_t i = 0; i < alive.size(); ++i) local[alive[i]] = static_cast<int>(i);
  std::vector<int> parent(alive.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < alive.size(); ++i) {
    const SimplexFacet& f = qh.facets[alive[i]];
    for (int nb : f.nb) {
      const SimplexFacet& g = qh.facets[nb];
      if ((f.n - g.n).norm() <= kCoplanarTol && std::abs(f.o - g.o) <= kCoplanarTol) {
        const int a = find(static_cast<int>(i));
        const int b = find(local.at(nb));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<int, std::vector<int>> groups;
  for (std::size_t i = 0; i < alive.size(); ++i) groups[find(static_cast<int>(i))].push_back(alive[i]);

  std::vector<Facet> facets;
  facets.reserve(groups.size());
  for (const auto& [root, members] : groups) {
    VectorXd n = VectorXd::Zero(k);
    for (int f : members) n += qh.facets[f].n;
    n.normalize();
    std::vector<int> ids;
    double measure = 0.0;
    for (int f : members) {
      std::vector<Point> w;
      for (int id : qh.facets[f].v) {
        ids.push_back(id);
        w.push_back(points[s.origin[id]]);
      }
      measure += simplex_measure(w);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    double o = -std::numeric_limits<double>::infinity();
    for (int id : ids) o = std::max(o, n.dot(s.pts[id]));

    // Back to original coordinates: n·((y - lo)/span) <= o.
    VectorXd a = n.cwiseQuotient(s.span);
    double b = o + a.dot(s.lo);
    const double len = a.norm();
    Facet out;
    out.normal.resize(k);
    for (int r = 0; r < k; ++r) out.normal[r] = a[r] / len;
    out.offset = b / len;
    out.measure = measure;
    for (int id : ids) out.vertices.push_back(vertex_of[id]);
    facets.push_back(std::move(out));
  }
  std::sort(facets.begin(), facets.end(), [](const Facet& x, const Facet& y) {
    return x.normal < y.normal;
  });

  double vol = 0.0;
  for (int f : alive) {
    MatrixXd m(k, k);
    for (int i = 0; i < k; ++i) m.col(i) = s.pts[qh.facets[f].v[i]] - qh.inside;
    vol += std::abs(m.determinant());
  }
  vol /= factorial(k);
  for (int r = 0; r < k; ++r) vol *= s.span[r];

  return Polytope(k, std::move(vertices), std::move(facets), Provenance::from_points, vol, true);
}

Polytope flat_hull(const std::vector<Point>& points) {
  if (points.empty()) throw InvalidArgument("flat_hull of an empty point set");
  const int k = static_cast<int>(points[0].size());
  try {
    return convex_hull(points);
  } catch (const DegenerateHull&) {
  }

  // Affine basis from the SVD of centred points, in units of the bounding box.
  const int n = static_cast<int>(points.size());
  VectorXd centre = VectorXd::Zero(k);
  for (const auto& p : points) centre += Eigen::Map<const VectorXd>(p.data(), k);
  centre /= n;
  double scale = 0.0;
  MatrixXd c(k, n);
  for (int i = 0; i < n; ++i) {
    c.col(i) = Eigen::Map<const VectorXd>(points[i].data(), k) - centre;
    scale = std::max(scale, c.col(i).lpNorm<Eigen::Infinity>());
  }
  int rank = 0;
  MatrixXd u = MatrixXd::Identity(k, k);
  if (scale > 0.0) {
    Eigen::JacobiSVD<MatrixXd> svd(c / scale, Eigen::ComputeFullU);
    u = svd.matrixU();
    for (int i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()[i] > kDedupTol * std::sqrt(static_cast<double>(n))) ++rank;
  }

  std::vector<Point> vertices;
  std::vector<Facet> facets;
  auto lift = [&](const VectorXd& a, double b) {
    Facet f;
    f.normal.assign(a.data(), a.data() + k);
    f.offset = b;
    return f;
  };

  if (rank == 0) {
    vertices.push_back(Point(centre.data(), centre.data() + k));
  } else if (rank == 1) {
    const VectorXd dir = u.col(0);
    int lo = 0, hi = 0;
    std::vector<double> t(n);
    for (int i = 0; i < n; ++i) {
      t[i] = dir.dot(c.col(i));
      if (t[i] < t[lo]) lo = i;
      if (t[i] > t[hi]) hi = i;
    }
    vertices.push_back(points[lo]);
    vertices.push_back(points[hi]);
    Facet f_hi = lift(dir, dir.dot(Eigen::Map<const VectorXd>(points[hi].data(), k)));
    f_hi.vertices = {1};
    Facet f_lo = lift(-dir, -dir.dot(Eigen::Map<const VectorXd>(points[lo].data(), k)));
    f_lo.vertices = {0};
    facets.push_back(f_hi);
    facets.push_back(f_lo);
  } else {
    const MatrixXd basis = u.leftCols(rank);
    std::vector<Point> low(n, Point(rank));
    for (int i = 0; i < n; ++i) {
      const VectorXd z = basis.transpose() * c.col(i);
      for (int r = 0; r < rank; ++r) low[i][r] = z[r];
    }
    const Polytope sub = convex_hull(low);
    for (const auto& v : sub.vertices()) {
      const VectorXd y = centre + basis * Eigen::Map<const VectorXd>(v.data(), rank);
      vertices.push_back(Point(y.data(), y.data() + k));
    }
    for (const auto& sf : sub.facets()) {
      const VectorXd a = basis * Eigen::Map<const VectorXd>(sf.normal.data(), rank);
      Facet f = lift(a, sf.offset + a.dot(centre));
      f.measure = sf.measure;
      f.vertices = sf.vertices;
      facets.push_back(std::move(f));
    }
  }
  std::vector<int> all(vertices.size());
  std::iota(all.begin(), all.end(), 0);
  for (int r = rank; r < k; ++r) {
    const VectorXd a = u.col(r);
    const double b = a.dot(centre);
    Facet plus = lift(a, b);
    plus.vertices = all;
    Facet minus = lift(-a, -b);
    minus.vertices = all;
    facets.push_back(std::move(plus));
    facets.push_back(std::move(minus));
  }
  return Polytope(k, std::move(vertices), std::move(facets), Provenance::from_points, 0.0, false);
}

}  // namespace nearopt::geometry
