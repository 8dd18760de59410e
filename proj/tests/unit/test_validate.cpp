#include <cmath>
#include <sstream>

#include "doctest.h"
#include "nearopt/errors.hpp"
#include "nearopt/validate.hpp"
#include "support/suite.hpp"

using namespace nearopt;
using namespace nearopt::validate;

namespace {

const std::vector<model::GroupSpec> kGroups{{"solar", {"solar"}}, {"onwind", {"onwind"}}, {"gas", {"gas"}}};

std::map<std::string, double> optimum_design(const testing::Suite& s, int i) {
  const auto sol = lp::solve(s.problems[i].lp);
  REQUIRE(sol.optimal());
  return model::investments_by_element(s.problems[i], lp::project_investments(sol.x, s.problems[i].index));
}

std::map<std::string, double> scaled(std::map<std::string, double> d, double f) {
  for (auto& [k, v] : d) v *= f;
  return d;
}

}  // namespace

TEST_CASE("stress test of a design") {
  const auto suite = testing::make_suite(2, 24, 3, 5, kGroups);
  // Comfortably oversized: the joint optimum scaled up.
  const auto jsol = lp::solve(suite.joint.lp);
  REQUIRE(jsol.optimal());
  const auto joint_design =
      model::investments_by_element(suite.joint, lp::project_investments(jsol.x, suite.joint.index));

  SUBCASE("joint optimum serves every scenario within its own budget") {
    const auto budgets = design_budgets(suite.network, suite.costs, joint_design, suite.scenarios);
    const auto r = stress_test("joint", suite.network, suite.costs, joint_design, suite.scenarios, budgets);
    CHECK(r.total_shed <= 1e-6 * r.total_load);
    double load = 0.0, shed = 0.0, opex = 0.0;
    for (const auto& row : r.rows) {
      load += row.load;
      shed += row.shed_energy;
      opex += row.operational_cost;
      CHECK(row.operational_cost <= row.budget * (1 + 1e-6));
    }
    CHECK(r.total_load == doctest::Approx(load));
    CHECK(r.total_shed == doctest::Approx(shed));
    CHECK(r.budget_used == doctest::Approx(opex));

    // Doubling the penalty changes nothing when nothing is shed.
    StressOptions twice;
    twice.shed_cost = 2 * kDefaultShedCost;
    const auto r2 = stress_test("joint", suite.network, suite.costs, joint_design, suite.scenarios, budgets, twice);
    CHECK(r2.total_shed <= 1e-6 * r2.total_load);
    CHECK(r2.total_operational_cost == doctest::Approx(r.total_operational_cost).epsilon(1e-6));
  }

  SUBCASE("zero design sheds all load") {
    auto zero = scaled(joint_design, 0.0);
    auto net = suite.network;
    for (auto& l : net.links) l.p_nom = 0.0;
    const auto r = stress_test("zero", net, suite.costs, zero, suite.scenarios, {});
    CHECK(r.relative_shedding == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(r.total_shed_cost == doctest::Approx(kDefaultShedCost * r.total_load).epsilon(1e-7));
  }

  SUBCASE("budget monotonicity and split components") {
    const auto design = optimum_design(suite, 0);
    const auto base = design_budgets(suite.network, suite.costs, design, suite.scenarios);
    double previous = lp::kInf;
    for (double f : {0.0, 0.3, 0.7, 1.0, 2.0}) {
      std::vector<double> b = base;
      for (double& v : b) v *= f;
      const auto r = stress_test("opt0", suite.network, suite.costs, design, suite.scenarios, b);
      CHECK(r.total_shed <= previous + 1e-6 * r.total_load);
      previous = r.total_shed;
      for (const auto& row : r.rows) {
        CHECK(row.technical_shed >= -1e-9);
        CHECK(row.over_budget_shed >= -1e-9);
        CHECK(row.technical_shed + row.over_budget_shed == doctest::Approx(row.shed_energy));
        CHECK((row.shed_energy >= 0.0 && row.shed_energy <= row.load * (1 + 1e-9)));
      }
    }
  }

  SUBCASE("CO2 accounting respects the limit") {
    StressOptions o;
    o.co2_limit = 5000.0;
    const auto r = stress_test("capped", suite.network, suite.costs, joint_design, suite.scenarios, {}, o);
    for (const auto& row : r.rows) CHECK(row.emissions <= o.co2_limit * (1 + 1e-6) + 1e-6);
  }

  SUBCASE("zero shedding certifies feasibility without shedding variables") {
    for (const auto& sc : suite.scenarios) {
      auto d = model::build_dispatch_lp(suite.network, joint_design, sc, lp::kInf, std::nullopt, kDefaultShedCost,
                                        suite.costs);
      const auto s = lp::solve(d.lp);
      REQUIRE(s.optimal());
      REQUIRE(model::shed_energy(d, s.x) <= 1e-6 * d.annual_load[0]);
      auto no_shed = d.lp;
      for (int c : d.shed_columns[0]) no_shed.set_bounds(c, 0.0, 0.0);
      // Same headroom convention as the other pinned-capacity oracles.
      const auto& inv = d.index.investment_columns();
      for (int c : inv) no_shed.set_bounds(c, no_shed.lower()[c] * (1 + 1e-7) + 1e-7, no_shed.upper()[c] * (1 + 1e-7) + 1e-7);
      CHECK(lp::solve(no_shed).optimal());
    }
  }

  SUBCASE("budget list must match") {
    CHECK_THROWS_AS(stress_test("x", suite.network, suite.costs, joint_design, suite.scenarios, {1.0}),
                    InvalidArgument);
  }
}

TEST_CASE("summarize") {
  auto report = [](const std::string& name, double shed, double load) {
    ValidationReport r;
    r.design = name;
    r.total_shed = shed;
    r.total_load = load;
    r.relative_shedding = shed / load;
    return r;
  };
  CHECK(summarize({report("a", 1, 10)}).size() == 1);
  const auto rows = summarize({report("zero", 0, 10), report("five", 5, 10), report("three", 3, 20)});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].design == "zero");
  CHECK(rows[1].design == "three");
  CHECK(rows[2].design == "five");
  for (const auto& r : rows) CHECK(r.relative_shedding == doctest::Approx(r.total_shed / r.total_load));
  std::ostringstream csv;
  write_summary_csv(csv, rows);
  CHECK(csv.str().rfind("design,total_shed,total_load,relative_shedding", 0) == 0);
}
