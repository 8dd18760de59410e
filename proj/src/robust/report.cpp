#include <cmath>
#include <ostream>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/robust.hpp"

namespace nearopt::robust {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json polytope_json(const geometry::Polytope& p) { return json::parse(geometry::to_json(p)); }

double read_number(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

std::string to_json(const RobustRun& run) {
  json j;
  j["scenario_ids"] = run.scenario_ids;
  j["c_opts"] = run.c_opts;
  j["c_star"] = run.c_star;
  j["eps"] = run.eps;
  j["bound"] = (1.0 + run.eps) * run.c_star;
  j["labels"] = run.labels;
  j["spaces"] = json::array();
  for (const auto& s : run.spaces) j["spaces"].push_back(polytope_json(s));
  j["intersection"] = run.intersection ? polytope_json(*run.intersection) : json(nullptr);
  j["volume_ratios"] = run.volume_ratios;
  j["centre"] = run.centre;
  j["radius"] = run.radius;
  j["diagnostics"] = {{"radius_ratio", number(run.radius_ratio())},
                      {"volume_factor", number(run.volume_factor())},
                      {"scale_per_dimension", number(run.scale_per_dimension())}};
  j["elements"] = run.elements;
  j["capital_costs"] = run.capital_costs;
  j["allocations"] = json::object();
  for (const auto& [mode, x] : run.allocations) {
    j["allocations"][mode] = {{"investments", x}, {"capex", capex(x, run.capital_costs)}};
  }
  return j.dump(2);
}

RobustRun robust_run_from_json(const std::string& text) {
  RobustRun run;
  try {
    const json j = json::parse(text);
    run.scenario_ids = j.at("scenario_ids").get<std::vector<std::string>>();
    run.c_opts = j.at("c_opts").get<std::vector<double>>();
    run.c_star = j.at("c_star").get<double>();
    run.eps = j.at("eps").get<double>();
    run.labels = j.at("labels").get<std::vector<std::string>>();
    for (const auto& s : j.at("spaces")) run.spaces.push_back(geometry::polytope_from_json(s.dump()));
    if (!j.at("intersection").is_null()) run.intersection = geometry::polytope_from_json(j["intersection"].dump());
    for (const auto& v : j.at("volume_ratios")) run.volume_ratios.push_back(read_number(v));
    run.centre = j.at("centre").get<std::vector<double>>();
    run.radius = j.at("radius").get<double>();
    run.elements = j.at("elements").get<std::vector<std::string>>();
    run.capital_costs = j.at("capital_costs").get<std::vector<double>>();
    for (const auto& [mode, a] : j.at("allocations").items())
      run.allocations[mode] = a.at("investments").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("robust run JSON: ") + e.what());
  }
  return run;
}

void write_capacity_csv(std::ostream& out, const RobustRun& run) {
  out << "element";
  for (const auto& [mode, x] : run.allocations) out << ',' << mode;
  out << '\n';
  const auto precision = out.precision(17);
  for (std::size_t i = 0; i < run.elements.size(); ++i) {
    out << run.elements[i];
    for (const auto& [mode, x] : run.allocations) out << ',' << x.at(i);
    out << '\n';
  }
  out.precision(precision);
}

}  // namespace nearopt::robust
