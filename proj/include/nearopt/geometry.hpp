#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nearopt::geometry {

using Point = std::vector<double>;

// a·y <= b
struct Halfspace {
  Point normal;
  double offset = 0.0;
};

struct Facet {
  Point normal;  // unit, outward
  double offset = 0.0;
  double measure = 0.0;      // (k-1)-dimensional Lebesgue measure
  std::vector<int> vertices; // indices into Polytope::vertices()
};

enum class Provenance { from_points, from_halfspaces };

// Bounded convex polytope carrying both its vertex and facet descriptions.
class Polytope {
public:
  Polytope() = default;
  Polytope(int dimension, std::vector<Point> vertices, std::vector<Facet> facets,
           Provenance provenance, double volume, bool full_dimensional);

  int dimension() const { return dimension_; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<Facet>& facets() const { return facets_; }
  Provenance provenance() const { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = p; }
  const std::vector<std::string>& labels() const { return labels_; }
  void set_labels(std::vector<std::string> labels);
  bool full_dimensional() const { return full_dimensional_; }
  double cached_volume() const { return volume_; }

  std::vector<Halfspace> halfspaces() const;
  // Largest violation a·y - b over all facets (<= 0 inside).
  double max_violation(const Point& y) const;

private:
  int dimension_ = 0;
  std::vector<Point> vertices_;
  std::vector<Facet> facets_;
  Provenance provenance_ = Provenance::from_points;
  std::vector<std::string> labels_;
  double volume_ = 0.0;
  bool full_dimensional_ = false;
};

// Quickhull in dimension 2..8. Throws DegenerateHull when the input does not
// span R^k.
Polytope convex_hull(const std::vector<Point>& points);

// Hull inside the affine span of the points, for inputs of any rank. The span
// is closed off by pairs of opposite halfspaces; the volume is zero unless the
// points are full-dimensional.
Polytope flat_hull(const std::vector<Point>& points);

// Zero for lower-dimensional polytopes (check full_dimensional()).
double volume(const Polytope& p);

struct ChebyshevResult {
  Point centre;
  double radius = 0.0;
  std::vector<int> tangent;   // indices of halfspaces touching the ball
  std::vector<double> duals;  // one per halfspace
};

ChebyshevResult chebyshev(const std::vector<Halfspace>& halfspaces);

struct SupportResult {
  double value = 0.0;
  Point argmax;
};

// max d·y over the halfspace system.
SupportResult support(const std::vector<Halfspace>& halfspaces, const Point& direction);

Polytope intersect_halfspaces(const std::vector<std::vector<Halfspace>>& systems);

Polytope project_pair(const Polytope& p, int i, int j);

// Degrees; +inf for an empty set.
double min_angle_to_set(const Point& d, const std::vector<Point>& used);

std::string to_json(const Polytope& p);
Polytope polytope_from_json(const std::string& text);
void write_vertices_csv(std::ostream& out, const Polytope& p);

}  // namespace nearopt::geometry
