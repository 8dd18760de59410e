#include <openssl/evp.h>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/pipeline.hpp"

namespace nearopt::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

scenario::SyntheticSpec synthetic_from_json(const json& j) {
  scenario::SyntheticSpec s;
  s.id = j.value("id", s.id);
  s.days = j.value("days", s.days);
  s.step_hours = j.value("step_hours", s.step_hours);
  s.seed = j.value("seed", s.seed);
  s.first_weekday = j.value("first_weekday", s.first_weekday);
  for (const auto& c : j.value("capacity_factors", json::array()))
    s.capacity_factors.push_back({c.at("id"), c.at("kind"), c.value("mean", 0.3), c.value("variability", 1.0)});
  s.inflow_means = j.value("inflow_means", s.inflow_means);
  s.bus_region = j.value("bus_region", s.bus_region);
  s.mean_load = j.value("mean_load", s.mean_load);
  s.region_temperature = j.value("region_temperature", s.region_temperature);
  s.load_scale = j.value("load_scale", s.load_scale);
  return s;
}

json synthetic_to_json(const scenario::SyntheticSpec& s) {
  json cfs = json::array();
  for (const auto& c : s.capacity_factors)
    cfs.push_back({{"id", c.id}, {"kind", c.kind}, {"mean", c.mean}, {"variability", c.variability}});
  return {{"id", s.id},
          {"days", s.days},
          {"step_hours", s.step_hours},
          {"seed", s.seed},
          {"first_weekday", s.first_weekday},
          {"capacity_factors", cfs},
          {"inflow_means", s.inflow_means},
          {"bus_region", s.bus_region},
          {"mean_load", s.mean_load},
          {"region_temperature", s.region_temperature},
          {"load_scale", s.load_scale}};
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(eps >= 0.0)) throw InvalidArgument("eps must be nonnegative");
  if (!(co2_fraction >= 0.0)) throw InvalidArgument("co2 fraction must be nonnegative");
  if (scenario_count < 1) throw InvalidArgument("need at least one scenario");
  if (parallel < 1) throw InvalidArgument("parallel must be at least 1");
  if (groups.size() < 2 || groups.size() > 8) throw InvalidArgument("reduction needs 2..8 groups");
  if (base_scenario.empty() && !synthetic) throw InvalidArgument("config needs base_scenario or synthetic");
  if (allocations.empty()) throw InvalidArgument("no allocation modes selected");
  if (!(shed_cost > 0.0)) throw InvalidArgument("shed cost must be positive");
  explore.validate();
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path);
  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  PipelineConfig c;
  try {
    const json j = json::parse(in);
    c.network = resolve(base, j.at("network").get<std::string>());
    c.costs = resolve(base, j.at("costs").get<std::string>());
    c.base_scenario = resolve(base, j.value("base_scenario", std::string()));
    if (j.contains("synthetic") && !j["synthetic"].is_null()) c.synthetic = synthetic_from_json(j["synthetic"]);
    c.regenerate_loads = j.value("regenerate_loads", c.regenerate_loads);
    c.output = resolve(base, j.value("output", c.output));
    if (j.contains("scenarios")) {
      const auto& s = j["scenarios"];
      c.scenario_count = s.value("count", c.scenario_count);
      if (s.contains("perturbation")) {
        const auto& p = s["perturbation"];
        auto& q = c.perturbation;
        q.cf_amplitude = p.value("cf_amplitude", q.cf_amplitude);
        q.cf_phase_steps = p.value("cf_phase_steps", q.cf_phase_steps);
        q.temperature_shift = p.value("temperature_shift", q.temperature_shift);
        q.inflow_scale = p.value("inflow_scale", q.inflow_scale);
        q.load_scale = p.value("load_scale", q.load_scale);
      }
    }
    c.eps = j.value("eps", c.eps);
    c.co2_fraction = j.value("co2_fraction", c.co2_fraction);
    if (j.contains("reduction")) {
      const auto& r = j["reduction"];
      if (r.contains("groups")) {
        c.groups.clear();
        for (const auto& g : r["groups"])
          c.groups.push_back({g.at("label"), g.at("tags").get<std::vector<std::string>>()});
      }
      const std::string w = r.value("weights", std::string("capital-cost"));
      if (w == "capital-cost") c.weights = model::WeightSource::capital_cost;
      else if (w == "unity") c.weights = model::WeightSource::unity;
      else throw DataError("unknown weight source " + w);
    }
    if (j.contains("explore")) {
      const auto& e = j["explore"];
      auto& x = c.explore;
      if (e.contains("method")) x.method = explore::method_from_string(e["method"]);
      x.iterations = e.value("iterations", x.iterations);
      x.theta = e.value("theta", x.theta);
      x.theta_min = e.value("theta_min", x.theta_min);
      x.decay = e.value("decay", x.decay);
      x.parallel = e.value("parallel", x.parallel);
      if (e.contains("convergence") && !e["convergence"].is_null())
        x.convergence = explore::Convergence{e["convergence"].at("delta_percent"), e["convergence"].at("window")};
    }
    if (j.contains("allocations")) {
      c.allocations.clear();
      for (const auto& m : j["allocations"]) c.allocations.push_back(robust::allocation_mode_from_string(m));
    }
    c.baseline = j.value("baseline", c.baseline);
    if (j.contains("validation")) {
      c.shed_cost = j["validation"].value("shed_cost", c.shed_cost);
      c.split_components = j["validation"].value("split_components", c.split_components);
    }
    c.seed = j.value("seed", c.seed);
    c.parallel = j.value("parallel", c.parallel);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
  c.validate();
  return c;
}

std::string config_to_json(const PipelineConfig& c) {
  json groups = json::array();
  for (const auto& g : c.groups) groups.push_back({{"label", g.label}, {"tags", g.tags}});
  std::vector<std::string> modes;
  for (auto m : c.allocations) modes.push_back(robust::to_string(m));
  const auto& p = c.perturbation;
  json j = {
      {"network", c.network},
      {"costs", c.costs},
      {"base_scenario", c.base_scenario},
      {"synthetic", c.synthetic ? synthetic_to_json(*c.synthetic) : json(nullptr)},
      {"regenerate_loads", c.regenerate_loads},
      {"output", c.output},
      {"scenarios",
       {{"count", c.scenario_count},
        {"perturbation",
         {{"cf_amplitude", p.cf_amplitude},
          {"cf_phase_steps", p.cf_phase_steps},
          {"temperature_shift", p.temperature_shift},
          {"inflow_scale", p.inflow_scale},
          {"load_scale", p.load_scale}}}}},
      {"eps", c.eps},
      {"co2_fraction", c.co2_fraction},
      {"reduction",
       {{"groups", groups}, {"weights", c.weights == model::WeightSource::unity ? "unity" : "capital-cost"}}},
      {"explore",
       {{"method", explore::to_string(c.explore.method)},
        {"iterations", c.explore.iterations},
        {"theta", c.explore.theta},
        {"theta_min", c.explore.theta_min},
        {"decay", c.explore.decay},
        {"parallel", c.explore.parallel},
        {"convergence", c.explore.convergence ? json{{"delta_percent", c.explore.convergence->delta_percent},
                                                     {"window", c.explore.convergence->window}}
                                              : json(nullptr)}}},
      {"allocations", modes},
      {"baseline", c.baseline},
      {"validation", {{"shed_cost", c.shed_cost}, {"split_components", c.split_components}}},
      {"seed", c.seed},
      {"parallel", c.parallel}};
  return j.dump(2);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return out.str();
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

}  // namespace nearopt::pipeline
