#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/geometry.hpp"

namespace nearopt::geometry {

Polytope::Polytope(int dimension, std::vector<Point> vertices, std::vector<Facet> facets,
                   Provenance provenance, double volume, bool full_dimensional)
    : dimension_(dimension),
      vertices_(std::move(vertices)),
      facets_(std::move(facets)),
      provenance_(provenance),
      volume_(volume),
      full_dimensional_(full_dimensional) {}

void Polytope::set_labels(std::vector<std::string> labels) {
  if (!labels.empty() && static_cast<int>(labels.size()) != dimension_)
    throw InvalidArgument("label count does not match polytope dimension");
  labels_ = std::move(labels);
}

std::vector<Halfspace> Polytope::halfspaces() const {
  std::vector<Halfspace> out;
  out.reserve(facets_.size());
  for (const auto& f : facets_) out.push_back({f.normal, f.offset});
  return out;
}

double Polytope::max_violation(const Point& y) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& f : facets_) {
    double a = -f.offset;
    for (int r = 0; r < dimension_; ++r) a += f.normal[r] * y[r];
    worst = std::max(worst, a);
  }
  return worst;
}

double volume(const Polytope& p) {
  if (!p.full_dimensional()) return 0.0;
  return p.cached_volume();
}

Polytope project_pair(const Polytope& p, int i, int j) {
  const int k = p.dimension();
  if (i == j || i < 0 || j < 0 || i >= k || j >= k)
    throw InvalidArgument("project_pair needs two distinct valid dimensions");
  std::vector<Point> pts;
  pts.reserve(p.vertices().size());
  for (const auto& v : p.vertices()) pts.push_back({v[i], v[j]});
  Polytope out = flat_hull(pts);
  if (!p.labels().empty()) out.set_labels({p.labels()[i], p.labels()[j]});
  return out;
}

double min_angle_to_set(const Point& d, const std::vector<Point>& used) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& u : used) {
    double c = 0.0;
    for (std::size_t r = 0; r < d.size(); ++r) c += d[r] * u[r];
    best = std::min(best, std::acos(std::clamp(c, -1.0, 1.0)) * 180.0 / std::numbers::pi);
  }
  return best;
}

std::string to_json(const Polytope& p) {
  nlohmann::json j;
  j["dimension"] = p.dimension();
  j["labels"] = p.labels();
  j["provenance"] = p.provenance() == Provenance::from_points ? "from-points" : "from-halfspaces";
  j["full_dimensional"] = p.full_dimensional();
  j["volume"] = volume(p);
  j["vertices"] = p.vertices();
  nlohmann::json facets = nlohmann::json::array();
  for (const auto& f : p.facets()) {
    facets.push_back({{"normal", f.normal},
                      {"offset", f.offset},
                      {"measure", f.measure},
                      {"vertices", f.vertices}});
  }
  j["facets"] = std::move(facets);
  return j.dump(2);
}

Polytope polytope_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("polytope JSON: ") + e.what());
  }
  try {
    std::vector<Facet> facets;
    for (const auto& f : j.at("facets")) {
      Facet out;
      out.normal = f.at("normal").get<Point>();
      out.offset = f.at("offset").get<double>();
      out.measure = f.at("measure").get<double>();
      out.vertices = f.at("vertices").get<std::vector<int>>();
      facets.push_back(std::move(out));
    }
    const auto prov = j.at("provenance").get<std::string>() == "from-points"
                          ? Provenance::from_points
                          : Provenance::from_halfspaces;
    Polytope p(j.at("dimension").get<int>(), j.at("vertices").get<std::vector<Point>>(),
               std::move(facets), prov, j.at("volume").get<double>(),
               j.at("full_dimensional").get<bool>());
    p.set_labels(j.at("labels").get<std::vector<std::string>>());
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("polytope JSON: ") + e.what());
  }
}

void write_vertices_csv(std::ostream& out, const Polytope& p) {
  for (int r = 0; r < p.dimension(); ++r) {
    if (r) out << ',';
    out << (p.labels().empty() ? "y" + std::to_string(r) : p.labels()[r]);
  }
  out << '\n';
  out.precision(17);
  for (const auto& v : p.vertices()) {
    for (int r = 0; r < p.dimension(); ++r) {
      if (r) out << ',';
      out << v[r];
    }
    out << '\n';
  }
}

}  // namespace nearopt::geometry
