#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/pipeline.hpp"

using namespace nearopt;
using pipeline::Stage;

int main(int argc, char** argv) {
  CLI::App app{"Near-optimal capacity expansion across weather scenarios"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<double> eps;
  std::optional<int> iterations;
  std::optional<std::string> method;
  std::optional<int> parallel;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  const std::pair<const char*, Stage> commands[] = {
      {"generate-scenarios", Stage::generate}, {"optimize", Stage::optimize}, {"explore", Stage::explore},
      {"intersect", Stage::intersect},         {"allocate", Stage::allocate}, {"validate", Stage::validate},
      {"report", Stage::report}};
  std::vector<std::pair<CLI::App*, Stage>> subs;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "pipeline configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--eps", eps, "relative cost slack")->check(CLI::NonNegativeNumber);
    sub->add_option("--iterations", iterations, "exploration directions after the initial 2k")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--method", method, "random-uniform | facets | maximal-centre-then-facets");
    sub->add_option("--parallel", parallel, "worker count")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "random seed");
    sub->add_option("--out", out, "run directory");
  };
  for (const auto& [name, stage] : commands) {
    auto* sub = app.add_subcommand(name, std::string("run ") + name + " and any stale prerequisites");
    add_common(sub);
    subs.emplace_back(sub, stage);
  }
  auto* run = app.add_subcommand("run", "run every stage, resuming from current artifacts");
  add_common(run);
  bool fresh = false;
  run->add_flag("--fresh", fresh, "ignore existing artifacts");

  CLI11_PARSE(app, argc, argv);

  try {
    auto config = pipeline::load_config(config_path);
    if (eps) config.eps = *eps;
    if (iterations) config.explore.iterations = *iterations;
    if (method) config.explore.method = explore::method_from_string(*method);
    if (parallel) config.parallel = *parallel;
    if (seed) config.seed = *seed;
    if (out) config.output = *out;
    pipeline::Pipeline p(std::move(config));
    if (run->parsed()) {
      if (fresh) {
        for (Stage s : {Stage::generate, Stage::optimize, Stage::explore, Stage::intersect, Stage::allocate,
                        Stage::validate, Stage::report})
          p.run(s, true);
      } else {
        p.run_all();
      }
    } else {
      for (const auto& [sub, stage] : subs)
        if (sub->parsed()) p.run(stage, true);
    }
    return p.status();
  } catch (const EmptyIntersection& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pipeline::kExitEmptyIntersection;
  } catch (const AllocationInfeasible& e) {
    std::cerr << "error: allocation " << e.mode() << " infeasible in scenario " << e.scenario() << ": " << e.what()
              << "\n";
    return pipeline::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return pipeline::kExitError;
  }
}
