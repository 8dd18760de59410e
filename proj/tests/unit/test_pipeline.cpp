#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/pipeline.hpp"

using namespace nearopt;
using namespace nearopt::pipeline;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Two buses, two weeks at 6 h steps, three scenarios, three reduced coordinates.
fs::path tiny_config(const std::string& name, double eps = 0.1) {
  const fs::path dir = fs::temp_directory_path() / ("nearopt_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  json net = {{"reference_emissions", 0.0},
              {"buses", {{{"id", "A"}}, {{"id", "B"}}}},
              {"links", {{{"id", "A-B"}, {"from", "A"}, {"to", "B"}, {"p_nom", 2.0}, {"extendable", true}, {"length", 100}}}},
              {"generators",
               {{{"id", "A-solar"}, {"bus", "A"}, {"carrier", "solar"}, {"extendable", true}, {"capacity_factor", "A-solar"}},
                {{"id", "B-onwind"}, {"bus", "B"}, {"carrier", "onwind"}, {"extendable", true}, {"capacity_factor", "B-onwind"}},
                {{"id", "A-onwind"}, {"bus", "A"}, {"carrier", "onwind"}, {"extendable", true}, {"capacity_factor", "A-onwind"}},
                {{"id", "B-gas"}, {"bus", "B"}, {"carrier", "gas"}, {"extendable", true}}}},
              {"storage", {{{"id", "A-battery"}, {"bus", "A"}}}}};
  json costs = {{"technologies",
                 {{"solar", {{"capital_cost", 420000}, {"lifetime", 25}}},
                  {"onwind", {{"capital_cost", 1100000}, {"lifetime", 25}}},
                  {"gas", {{"capital_cost", 550000}, {"lifetime", 30}, {"marginal_cost", 60}, {"emission_factor", 0.37}}},
                  {"battery", {{"capital_cost", 150000}, {"energy_capital_cost", 140000}, {"lifetime", 15}}},
                  {"transmission", {{"capital_cost", 400}, {"lifetime", 40}}}}}};
  json cfg = {
      {"network", "network.json"},
      {"costs", "costs.json"},
      {"output", "run"},
      {"synthetic",
       {{"days", 14},
        {"step_hours", 6},
        {"seed", 3},
        {"capacity_factors",
         {{{"id", "A-solar"}, {"kind", "solar"}, {"mean", 0.14}},
          {{"id", "A-onwind"}, {"kind", "wind"}, {"mean", 0.25}},
          {{"id", "B-onwind"}, {"kind", "wind"}, {"mean", 0.3}}}},
        {"bus_region", {{"A", "r"}, {"B", "r"}}},
        {"mean_load", {{"A", 10.0}, {"B", 6.0}}},
        {"region_temperature", {{"r", 6.0}}}}},
      {"scenarios", {{"count", 3}}},
      {"eps", eps},
      {"reduction",
       {{"groups",
         {{{"label", "solar"}, {"tags", {"solar"}}},
          {{"label", "onwind"}, {"tags", {"onwind"}}},
          {{"label", "gas"}, {"tags", {"gas"}}}}}}},
      {"explore", {{"iterations", 6}}},
      {"seed", 5}};
  std::ofstream(dir / "network.json") << net.dump(2);
  std::ofstream(dir / "costs.json") << costs.dump(2);
  std::ofstream(dir / "config.json") << cfg.dump(2);
  return dir / "config.json";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NEAROPT_CLI) + " " + args + " 2>/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("config loading resolves paths and rejects bad values") {
  const auto path = tiny_config("config");
  const auto c = load_config(path.string());
  CHECK(fs::path(c.network).is_absolute());
  CHECK(fs::path(c.output) == path.parent_path() / "run");
  CHECK(c.groups.size() == 3);
  CHECK(c.scenario_count == 3);
  CHECK(c.explore.iterations == 6);
  CHECK(c.seed == 5);
  // Round trip through the normalised form.
  const auto again = json::parse(config_to_json(c));
  CHECK(again["eps"] == 0.1);
  CHECK(again["reduction"]["groups"].size() == 3);

  PipelineConfig bad = c;
  bad.eps = -1;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = c;
  bad.groups.resize(1);
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), DataError);
}

TEST_CASE("sha256 matches known digests") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("pipeline runs, resumes and is deterministic") {
  const auto path = tiny_config("pipeline");
  auto config = load_config(path.string());
  const fs::path out(config.output);

  Pipeline p(config);
  p.run_all();
  CHECK(p.status() == kExitOk);
  for (const char* f : {"scenarios/index.json", "optimize.json", "spaces/index.json", "intersection.json",
                        "allocations.json", "capacities.csv", "validation/summary.csv", "validation/exact.json",
                        "validation/baseline.csv", "report.json", "manifest.json", "projections/solar__gas.csv"})
    CHECK_MESSAGE(fs::exists(out / f), f);

  const auto report = json::parse(slurp(out / "report.json"));
  CHECK(report.contains("diagnostics"));
  CHECK(report["volume_ratios"].size() == 3);

  // Resuming touches nothing.
  const auto manifest = slurp(out / "manifest.json");
  const auto stamp = fs::last_write_time(out / "report.json");
  Pipeline(config).run_all();
  CHECK(slurp(out / "manifest.json") == manifest);
  CHECK(fs::last_write_time(out / "report.json") == stamp);

  // A fresh run elsewhere reproduces every artifact byte for byte.
  PipelineConfig other = config;
  other.output = (out.parent_path() / "run2").string();
  fs::remove_all(other.output);
  Pipeline(other).run_all();
  CHECK(slurp(fs::path(other.output) / "manifest.json") == manifest);

  // A new eps keeps the optimisation and redoes exploration.
  const auto opt_stamp = fs::last_write_time(out / "optimize.json");
  const auto spaces_before = slurp(out / "spaces/index.json");
  PipelineConfig wider = config;
  wider.eps = 0.15;
  Pipeline(wider).run_all();
  CHECK(fs::last_write_time(out / "optimize.json") == opt_stamp);
  CHECK(slurp(out / "spaces/index.json") != spaces_before);
}

TEST_CASE("command line") {
  const auto path = tiny_config("cli");
  CHECK(run_cli("optimize --config " + path.string()) == kExitOk);
  CHECK(fs::exists(path.parent_path() / "run" / "optimize.json"));
  CHECK_FALSE(fs::exists(path.parent_path() / "run" / "spaces"));
  CHECK(run_cli("run --config " + path.string() + " --iterations 4 --method facets") == kExitOk);
  CHECK(run_cli("intersect --config " + path.string() + " --eps 0 --out " +
                (path.parent_path() / "zero").string()) == kExitEmptyIntersection);
  const auto inter = json::parse(slurp(path.parent_path() / "zero" / "intersection.json"));
  CHECK(inter["empty"] == true);
  CHECK(run_cli("explore --config " + path.string() + " --method nonsense") == kExitError);
  CHECK(run_cli("run") != kExitOk);
}
