#include <benchmark/benchmark.h>

#include "nearopt/robust.hpp"
#include "support/suite.hpp"

using namespace nearopt;

namespace {

const std::vector<model::GroupSpec> kGroups{{"solar", {"solar"}}, {"onwind", {"onwind"}}, {"gas", {"gas"}}};

struct Fixture {
  testing::Suite suite = testing::make_suite(3, 48, 4, 17, kGroups);
  robust::UniformBound ub = robust::uniform_bound(suite.c_opts, 0.1);
  std::vector<explore::ReducedProblem> problems = testing::slacked(suite, ub.bound);
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

// Batch width P inside one exploration; P = 1 is the serial reference path.
void BM_ExploreBatch(benchmark::State& state) {
  const auto& f = fixture();
  explore::ExploreConfig cfg;
  cfg.iterations = 24;
  cfg.parallel = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(explore::approximate_space(f.problems[0], cfg).hull.cached_volume());
}
BENCHMARK(BM_ExploreBatch)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

// Scenario-level fan-out.
void BM_ExploreScenarios(benchmark::State& state) {
  const auto& f = fixture();
  explore::ExploreConfig cfg;
  cfg.iterations = 12;
  const int workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(robust::explore_scenarios(f.problems, cfg, {}, workers).size());
}
BENCHMARK(BM_ExploreScenarios)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_AllocateMean(benchmark::State& state) {
  const auto& f = fixture();
  explore::ExploreConfig cfg;
  cfg.iterations = 12;
  static const auto centre = [&] {
    std::vector<geometry::Polytope> spaces;
    for (const auto& s : robust::explore_scenarios(f.problems, cfg, {}, 1)) spaces.push_back(s.hull);
    return robust::robust_centre(robust::intersect_scenarios(spaces).polytope);
  }();
  robust::AllocationInputs in{f.suite.ids, f.suite.c_opts, f.problems};
  in.parallel = static_cast<int>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(robust::allocate(centre.y, robust::AllocationMode::mean, in).investments.size());
}
BENCHMARK(BM_AllocateMean)->Arg(1)->Arg(2)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
