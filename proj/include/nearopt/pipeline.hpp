#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nearopt/explore.hpp"
#include "nearopt/model.hpp"
#include "nearopt/robust.hpp"
#include "nearopt/scenario.hpp"
#include "nearopt/validate.hpp"

namespace nearopt::pipeline {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitEmptyIntersection = 3;
inline constexpr int kExitExactSheds = 4;

struct PipelineConfig {
  std::string network;  // paths, relative ones resolved against the config file
  std::string costs;
  std::string base_scenario;  // scenario directory; empty uses `synthetic`
  std::optional<scenario::SyntheticSpec> synthetic;
  bool regenerate_loads = true;  // rebuild loads from perturbed temperatures
  std::string output = "run";

  int scenario_count = 4;
  scenario::PerturbationConfig perturbation;
  double eps = 0.05;
  double co2_fraction = 1.0;
  std::vector<model::GroupSpec> groups = model::default_groups();
  model::WeightSource weights = model::WeightSource::capital_cost;
  explore::ExploreConfig explore;
  std::vector<robust::AllocationMode> allocations{robust::AllocationMode::exact, robust::AllocationMode::conservative,
                                                  robust::AllocationMode::mean};
  bool baseline = true;
  double shed_cost = validate::kDefaultShedCost;
  bool split_components = true;
  std::uint64_t seed = 1;
  int parallel = 1;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

// JSON configuration; see data/demo/config.json.
PipelineConfig load_config(const std::string& path);
std::string config_to_json(const PipelineConfig& config);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

enum class Stage { generate, optimize, explore, intersect, allocate, validate, report };
const char* to_string(Stage s);

// Runs stages against a run directory. A stage is skipped when its artifact
// exists and was produced from the same inputs (a key chained from the
// upstream stages and the relevant configuration); forced stages always rerun.
class Pipeline {
public:
  explicit Pipeline(PipelineConfig config);

  // Runs `target` after making sure its prerequisites are current.
  void run(Stage target, bool force_target = true);
  // Every stage through report, resuming where artifacts are current.
  void run_all();

  // Exit code for the last completed run: nonzero when the exact design sheds load.
  int status() const { return status_; }
  const std::string& output_dir() const { return config_.output; }
  const PipelineConfig& config() const { return config_; }

private:
  void stage(Stage s, bool force);
  std::string key(Stage s) const;
  bool current(Stage s) const;
  void write_manifest() const;

  void generate();
  void optimize();
  void explore_spaces();
  void intersect();
  void allocate();
  void validate();
  void report();

  PipelineConfig config_;
  int status_ = kExitOk;
};

}  // namespace nearopt::pipeline
