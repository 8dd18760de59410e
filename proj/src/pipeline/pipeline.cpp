#include "nearopt/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "nearopt/errors.hpp"

namespace nearopt::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Stage s) {
  switch (s) {
    case Stage::generate: return "generate-scenarios";
    case Stage::optimize: return "optimize";
    case Stage::explore: return "explore";
    case Stage::intersect: return "intersect";
    case Stage::allocate: return "allocate";
    case Stage::validate: return "validate";
    case Stage::report: return "report";
  }
  return "?";
}

namespace {

constexpr Stage kStages[] = {Stage::generate, Stage::optimize, Stage::explore, Stage::intersect,
                             Stage::allocate, Stage::validate, Stage::report};

// Exact design shedding above this fraction of load fails the run.
constexpr double kExactShedTolerance = 1e-6;

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::exception& e) {
    throw DataError(p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

fs::path artifact(Stage s) {
  switch (s) {
    case Stage::generate: return "scenarios/index.json";
    case Stage::optimize: return "optimize.json";
    case Stage::explore: return "spaces/index.json";
    case Stage::intersect: return "intersection.json";
    case Stage::allocate: return "allocations.json";
    case Stage::validate: return "validation/summary.json";
    case Stage::report: return "report.json";
  }
  return {};
}

void log(Stage s, const std::string& msg) { std::cerr << "[" << to_string(s) << "] " << msg << "\n"; }

std::string hash_directory(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string acc;
  for (const auto& f : files) acc += fs::relative(f, dir).generic_string() + ":" + sha256_file(f.string()) + "\n";
  return sha256_hex(acc);
}

std::map<std::string, double> design_map(const std::vector<std::string>& elements, const std::vector<double>& x) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < elements.size(); ++i) out[elements[i]] = x[i];
  return out;
}

// Vertices of a planar polygon in counter-clockwise order.
std::vector<geometry::Point> ordered_polygon(const geometry::Polytope& p) {
  auto pts = p.vertices();
  if (pts.empty()) return pts;
  double cx = 0, cy = 0;
  for (const auto& v : pts) cx += v[0], cy += v[1];
  cx /= pts.size();
  cy /= pts.size();
  std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
    return std::atan2(a[1] - cy, a[0] - cx) < std::atan2(b[1] - cy, b[0] - cx);
  });
  return pts;
}

struct Inputs {
  model::Network network;
  model::CostAssumptions costs;
  std::vector<scenario::Scenario> scenarios;
  std::vector<std::string> ids;
};

}  // namespace

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {
  config_.validate();
  config_.explore.seed = config_.seed;
}

void Pipeline::run_all() { run(Stage::report, false); }

void Pipeline::run(Stage target, bool force_target) {
  fs::create_directories(config_.output);
  for (Stage s : kStages) {
    stage(s, s == target && force_target);
    if (s == target) break;
  }
}

bool Pipeline::current(Stage s) const {
  const fs::path p = fs::path(config_.output) / artifact(s);
  if (!fs::exists(p)) return false;
  try {
    return read_json(p).value("key", std::string()) == key(s);
  } catch (const DataError&) {
    return false;
  }
}

std::string Pipeline::key(Stage s) const {
  const json c = json::parse(config_to_json(config_));
  json j;
  switch (s) {
    case Stage::generate:
      j = {{"base", config_.base_scenario.empty() ? std::string() : hash_directory(config_.base_scenario)},
           {"synthetic", c["synthetic"]},
           {"regenerate_loads", c["regenerate_loads"]},
           {"scenarios", c["scenarios"]},
           {"seed", c["seed"]}};
      break;
    case Stage::optimize:
      j = {{"up", key(Stage::generate)},
           {"network", sha256_file(config_.network)},
           {"costs", sha256_file(config_.costs)},
           {"co2_fraction", c["co2_fraction"]}};
      break;
    case Stage::explore:
      j = {{"up", key(Stage::optimize)},
           {"eps", c["eps"]},
           {"reduction", c["reduction"]},
           {"explore", c["explore"]},
           {"seed", c["seed"]}};
      break;
    case Stage::intersect: j = {{"up", key(Stage::explore)}}; break;
    case Stage::allocate:
      j = {{"up", key(Stage::intersect)}, {"allocations", c["allocations"]}, {"baseline", c["baseline"]}};
      break;
    case Stage::validate: j = {{"up", key(Stage::allocate)}, {"validation", c["validation"]}}; break;
    case Stage::report: j = {{"up", key(Stage::validate)}}; break;
  }
  j["stage"] = to_string(s);
  return sha256_hex(j.dump());
}

void Pipeline::stage(Stage s, bool force) {
  const fs::path out(config_.output);
  if (!force && current(s)) {
    log(s, "up to date");
    if (s == Stage::intersect) {
      const json j = read_json(out / artifact(s));
      if (j.value("empty", false))
        throw EmptyIntersection(j.at("message").get<std::string>(), j.at("first_certifying_index").get<int>());
    }
    if (s == Stage::validate) status_ = read_json(out / artifact(s)).value("exact_sheds", false) ? kExitExactSheds : kExitOk;
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (s) {
      case Stage::generate: generate(); break;
      case Stage::optimize: optimize(); break;
      case Stage::explore: explore_spaces(); break;
      case Stage::intersect: intersect(); break;
      case Stage::allocate: allocate(); break;
      case Stage::validate: validate(); break;
      case Stage::report: report(); break;
    }
  } catch (...) {
    write_manifest();
    throw;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log(s, "done in " + std::to_string(secs) + " s");
  write_manifest();
}

void Pipeline::write_manifest() const {
  const fs::path out(config_.output);
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out).generic_string();
    if (rel != "manifest.json") files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json files_json = json::object();
  for (const auto& f : files) files_json[f] = sha256_file((out / f).string());
  write_json(out / "manifest.json", {{"files", files_json}});
}

namespace {

Inputs load_inputs(const PipelineConfig& c) {
  Inputs in;
  in.network = model::network_from_json(read_text(c.network));
  in.costs = model::costs_from_json(read_text(c.costs));
  const fs::path dir = fs::path(c.output) / "scenarios";
  const json index = read_json(dir / "index.json");
  for (const auto& id : index.at("ids")) {
    in.ids.push_back(id);
    in.scenarios.push_back(scenario::read_scenario((dir / id.get<std::string>()).string()));
  }
  return in;
}

struct Optimum {
  std::vector<std::string> ids;
  std::vector<double> c_opts;
  std::vector<std::string> elements;
  std::vector<double> capital_costs;
  std::vector<std::vector<double>> investments;
  int i_star = 0;
  double c_star = 0.0;
};

Optimum load_optimum(const PipelineConfig& c) {
  const json j = read_json(fs::path(c.output) / "optimize.json");
  Optimum o;
  o.ids = j.at("ids").get<std::vector<std::string>>();
  o.c_opts = j.at("c_opts").get<std::vector<double>>();
  o.elements = j.at("elements").get<std::vector<std::string>>();
  o.capital_costs = j.at("capital_costs").get<std::vector<double>>();
  o.investments = j.at("investments").get<std::vector<std::vector<double>>>();
  o.i_star = j.at("i_star");
  o.c_star = j.at("c_star");
  return o;
}

std::vector<geometry::Polytope> load_spaces(const PipelineConfig& c, const std::vector<std::string>& ids) {
  std::vector<geometry::Polytope> spaces;
  for (const auto& id : ids)
    spaces.push_back(geometry::polytope_from_json(read_text(fs::path(c.output) / "spaces" / (id + ".json"))));
  return spaces;
}

}  // namespace

void Pipeline::generate() {
  const fs::path dir = fs::path(config_.output) / "scenarios";
  scenario::Scenario base;
  std::optional<scenario::LoadSynthesis> synthesis;
  if (!config_.base_scenario.empty()) {
    base = scenario::read_scenario(config_.base_scenario);
  } else {
    const auto& spec = *config_.synthetic;
    base = scenario::synthetic_scenario(spec);
    if (config_.regenerate_loads) {
      synthesis.emplace();
      for (const auto& [bus, mean] : spec.mean_load) synthesis->by_bus[bus] = scenario::default_load_model(mean);
      synthesis->bus_region = spec.bus_region;
      synthesis->calendar = scenario::Calendar::consecutive(spec.days, spec.first_weekday);
      synthesis->scale = spec.load_scale;
    }
  }
  const auto scenarios = scenario::generate_scenarios(base, config_.scenario_count, config_.seed, config_.perturbation,
                                                      synthesis ? &*synthesis : nullptr);
  if (fs::exists(dir)) fs::remove_all(dir);
  json ids = json::array();
  for (const auto& sc : scenarios) {
    scenario::write_scenario((dir / sc.id).string(), sc);
    ids.push_back(sc.id);
  }
  write_json(dir / "index.json", {{"key", key(Stage::generate)}, {"ids", ids}});
  log(Stage::generate, std::to_string(scenarios.size()) + " scenarios");
}

void Pipeline::optimize() {
  const auto in = load_inputs(config_);
  const int n = static_cast<int>(in.scenarios.size());
  std::vector<model::ExpansionProblem> problems(n);
  std::vector<lp::Solution> sols(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(config_.parallel)
  for (int i = 0; i < n; ++i) {
    try {
      problems[i] = model::build_expansion_lp(in.network, in.scenarios[i], config_.co2_fraction, in.costs);
      sols[i] = lp::solve(problems[i].lp);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<double> c_opts;
  json investments = json::array();
  for (int i = 0; i < n; ++i) {
    if (!sols[i].optimal())
      throw SolverFailure("expansion problem for scenario " + in.ids[i] + " not solved: " + sols[i].message);
    c_opts.push_back(sols[i].objective);
    investments.push_back(lp::project_investments(sols[i].x, problems[i].index));
    log(Stage::optimize, in.ids[i] + ": C_opt = " + std::to_string(sols[i].objective));
  }
  const int i_star = robust::most_expensive(c_opts, in.ids);
  write_json(fs::path(config_.output) / "optimize.json",
             {{"key", key(Stage::optimize)},
              {"ids", in.ids},
              {"c_opts", c_opts},
              {"i_star", i_star},
              {"c_star", c_opts[i_star]},
              {"elements", problems[0].investment_elements},
              {"groups", problems[0].investment_groups},
              {"capital_costs", problems[0].capital_costs},
              {"investments", investments}});
}

void Pipeline::explore_spaces() {
  const auto in = load_inputs(config_);
  const auto opt = load_optimum(config_);
  const auto ub = robust::uniform_bound(opt.c_opts, config_.eps);
  std::vector<explore::ReducedProblem> problems;
  lp::ReductionMap map;
  for (const auto& sc : in.scenarios) {
    const auto p = model::build_expansion_lp(in.network, sc, config_.co2_fraction, in.costs);
    if (problems.empty()) map = model::reduction_map(p, config_.groups, config_.weights);
    problems.push_back(explore::make_reduced_problem(p.lp, p.index, map, ub.bound));
  }
  const auto states = robust::explore_scenarios(problems, config_.explore, {}, config_.parallel);
  const fs::path out(config_.output);
  json rows = json::array();
  for (std::size_t i = 0; i < states.size(); ++i) {
    auto hull = states[i].hull;
    if (hull.dimension() != map.dimension())
      throw SolverFailure("exploration of " + in.ids[i] + " found no points (" +
                          explore::to_string(states[i].termination) + ")");
    hull.set_labels(map.labels());
    write_text(out / "spaces" / (in.ids[i] + ".json"), geometry::to_json(hull) + "\n");
    std::ostringstream trace;
    explore::write_trace_csv(trace, states[i]);
    write_text(out / "traces" / (in.ids[i] + ".csv"), trace.str());
    const auto& h = states[i].history;
    rows.push_back({{"id", in.ids[i]},
                    {"termination", explore::to_string(states[i].termination)},
                    {"solves", h.size()},
                    {"volume", h.empty() ? 0.0 : h.back().volume},
                    {"radius", h.empty() ? 0.0 : h.back().radius},
                    {"lower_dimensional", states[i].lower_dimensional},
                    {"affine_rank", states[i].affine_rank}});
    log(Stage::explore, in.ids[i] + ": " + explore::to_string(states[i].termination) + " after " +
                            std::to_string(h.size()) + " solves");
  }
  write_json(out / "spaces" / "index.json", {{"key", key(Stage::explore)},
                                             {"eps", config_.eps},
                                             {"c_star", ub.c_star},
                                             {"bound", ub.bound},
                                             {"labels", map.labels()},
                                             {"scenarios", rows}});
}

void Pipeline::intersect() {
  const auto opt = load_optimum(config_);
  const auto spaces = load_spaces(config_, opt.ids);
  const fs::path p = fs::path(config_.output) / artifact(Stage::intersect);
  try {
    const auto inter = robust::intersect_scenarios(spaces);
    const auto centre = robust::robust_centre(inter.polytope);
    auto poly = inter.polytope;
    poly.set_labels(spaces[0].labels());
    write_json(p, {{"key", key(Stage::intersect)},
                   {"empty", false},
                   {"polytope", json::parse(geometry::to_json(poly))},
                   {"volume_ratios", inter.volume_ratios},
                   {"centre", centre.y},
                   {"radius", centre.radius}});
    log(Stage::intersect, "Chebyshev radius " + std::to_string(centre.radius));
  } catch (const EmptyIntersection& e) {
    const int j = e.first_certifying_index();
    const std::string msg = "scenario spaces have no common interior (first certified by scenario " + opt.ids[j] +
                            "); raise eps above " + std::to_string(config_.eps);
    write_json(p, {{"key", key(Stage::intersect)},
                   {"empty", true},
                   {"first_certifying_index", j},
                   {"first_certifying_scenario", opt.ids[j]},
                   {"message", msg}});
    throw EmptyIntersection(msg, j);
  }
}

void Pipeline::allocate() {
  const auto in = load_inputs(config_);
  const auto opt = load_optimum(config_);
  const fs::path out(config_.output);
  const json inter = read_json(out / "intersection.json");
  const geometry::Point y = inter.at("centre").get<std::vector<double>>();
  const auto ub = robust::uniform_bound(opt.c_opts, config_.eps);

  robust::AllocationInputs ai;
  ai.scenario_ids = in.ids;
  ai.c_opts = opt.c_opts;
  ai.parallel = config_.parallel;
  lp::ReductionMap map;
  for (const auto& sc : in.scenarios) {
    const auto p = model::build_expansion_lp(in.network, sc, config_.co2_fraction, in.costs);
    if (ai.problems.empty()) map = model::reduction_map(p, config_.groups, config_.weights);
    ai.problems.push_back(explore::make_reduced_problem(p.lp, p.index, map, ub.bound));
  }
  std::optional<explore::ReducedProblem> joint;
  const bool need_joint = std::count(config_.allocations.begin(), config_.allocations.end(),
                                     robust::AllocationMode::exact) > 0;
  if (need_joint) {
    joint = robust::joint_reduced_problem(
        model::build_joint_expansion_lp(in.network, in.scenarios, config_.co2_fraction, in.costs), map, ub.bound);
    ai.joint = &*joint;
  }

  json designs = json::object();
  std::vector<std::string> order;
  std::vector<double> first;
  for (auto mode : config_.allocations) {
    const auto a = robust::allocate(y, mode, ai);
    const std::string name = robust::to_string(mode);
    designs[name] = {{"investments", a.investments},
                     {"capex", robust::capex(a.investments, opt.capital_costs)},
                     {"reduced", lp::aggregate(a.investments, map)},
                     {"constituents", a.constituent_ids}};
    order.push_back(name);
    if (first.empty()) first = a.investments;
    log(Stage::allocate, name + ": capex " + std::to_string(robust::capex(a.investments, opt.capital_costs)));
  }
  if (config_.baseline) {
    const std::string ref = designs.contains("exact") ? "exact" : order.front();
    const double target = designs[ref]["capex"];
    const auto base = robust::baseline_design(opt.investments[opt.i_star], opt.capital_costs, target);
    designs["baseline"] = {{"investments", base},
                           {"capex", robust::capex(base, opt.capital_costs)},
                           {"reduced", lp::aggregate(base, map)},
                           {"constituents", {opt.ids[opt.i_star]}},
                           {"capex_reference", ref}};
    order.push_back("baseline");
  }

  std::ostringstream csv;
  csv.precision(17);
  csv << "element";
  for (const auto& n : order) csv << "," << n;
  csv << "\n";
  for (std::size_t e = 0; e < opt.elements.size(); ++e) {
    csv << opt.elements[e];
    for (const auto& n : order) csv << "," << designs[n]["investments"][e].get<double>();
    csv << "\n";
  }
  write_text(out / "capacities.csv", csv.str());
  write_json(out / "allocations.json", {{"key", key(Stage::allocate)},
                                        {"centre", y},
                                        {"order", order},
                                        {"elements", opt.elements},
                                        {"designs", designs}});
}

void Pipeline::validate() {
  const auto in = load_inputs(config_);
  const fs::path out(config_.output);
  const json alloc = read_json(out / "allocations.json");
  const auto elements = alloc.at("elements").get<std::vector<std::string>>();
  const auto order = alloc.at("order").get<std::vector<std::string>>();

  validate::StressOptions so;
  so.shed_cost = config_.shed_cost;
  so.split_components = config_.split_components;
  so.parallel = config_.parallel;
  so.co2_limit = in.network.reference_emissions > 0.0 ? config_.co2_fraction * in.network.reference_emissions
                                                      : lp::kInf;
  auto design_of = [&](const std::string& n) {
    return design_map(elements, alloc["designs"][n]["investments"].get<std::vector<double>>());
  };
  std::vector<double> budgets;
  const std::string budget_ref = alloc["designs"].contains("exact") ? "exact" : order.front();
  budgets = validate::design_budgets(in.network, in.costs, design_of(budget_ref), in.scenarios, so);

  std::vector<validate::ValidationReport> reports;
  for (const auto& n : order) {
    const auto r = validate::stress_test(n, in.network, in.costs, design_of(n), in.scenarios, budgets, so);
    write_text(out / "validation" / (n + ".json"), validate::to_json(r) + "\n");
    std::ostringstream csv;
    validate::write_report_csv(csv, r);
    write_text(out / "validation" / (n + ".csv"), csv.str());
    log(Stage::validate, n + ": relative shedding " + std::to_string(r.relative_shedding));
    reports.push_back(r);
  }
  bool exact_sheds = false;
  for (const auto& r : reports)
    if (r.design == "exact" && r.total_shed > kExactShedTolerance * r.total_load) exact_sheds = true;
  const auto rows = validate::summarize(reports);
  std::ostringstream csv;
  validate::write_summary_csv(csv, rows);
  write_text(out / "validation" / "summary.csv", csv.str());
  json summary = json::array();
  for (const auto& r : rows)
    summary.push_back({{"design", r.design},
                       {"total_shed", r.total_shed},
                       {"total_load", r.total_load},
                       {"relative_shedding", r.relative_shedding},
                       {"technical_shed", r.technical_shed},
                       {"over_budget_shed", r.over_budget_shed}});
  write_json(out / artifact(Stage::validate), {{"key", key(Stage::validate)},
                                               {"budget_reference", budget_ref},
                                               {"budgets", budgets},
                                               {"exact_sheds", exact_sheds},
                                               {"rows", summary}});
  status_ = exact_sheds ? kExitExactSheds : kExitOk;
  if (exact_sheds) log(Stage::validate, "the exact design sheds load");
}

void Pipeline::report() {
  const auto opt = load_optimum(config_);
  const fs::path out(config_.output);
  const json inter = read_json(out / "intersection.json");
  const json alloc = read_json(out / "allocations.json");
  const json space_index = read_json(out / "spaces" / "index.json");

  robust::RobustRun run;
  run.scenario_ids = opt.ids;
  run.c_opts = opt.c_opts;
  run.c_star = opt.c_star;
  run.eps = config_.eps;
  run.labels = space_index.at("labels").get<std::vector<std::string>>();
  run.spaces = load_spaces(config_, opt.ids);
  run.intersection = geometry::polytope_from_json(inter.at("polytope").dump());
  run.volume_ratios = inter.at("volume_ratios").get<std::vector<double>>();
  run.centre = inter.at("centre").get<std::vector<double>>();
  run.radius = inter.at("radius");
  run.elements = opt.elements;
  run.capital_costs = opt.capital_costs;
  for (const auto& [name, d] : alloc.at("designs").items())
    run.allocations[name] = d.at("investments").get<std::vector<double>>();

  json j = json::parse(robust::to_json(run));
  j["key"] = key(Stage::report);
  j["exploration"] = space_index.at("scenarios");
  j["validation"] = read_json(out / artifact(Stage::validate)).at("rows");
  write_json(out / "report.json", j);

  const int k = static_cast<int>(run.labels.size());
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      std::ostringstream csv;
      csv.precision(17);
      csv << "polytope," << run.labels[a] << "," << run.labels[b] << "\n";
      auto emit = [&](const std::string& name, const geometry::Polytope& p) {
        for (const auto& v : ordered_polygon(geometry::project_pair(p, a, b)))
          csv << name << "," << v[0] << "," << v[1] << "\n";
      };
      emit("intersection", *run.intersection);
      for (std::size_t i = 0; i < run.spaces.size(); ++i) emit(run.scenario_ids[i], run.spaces[i]);
      write_text(out / "projections" / (run.labels[a] + "__" + run.labels[b] + ".csv"), csv.str());
    }
  }
  log(Stage::report, "radius ratio " + std::to_string(run.radius_ratio()) + ", volume factor " +
                         std::to_string(run.volume_factor()));
}

}  // namespace nearopt::pipeline
