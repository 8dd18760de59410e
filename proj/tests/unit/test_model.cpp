#include <cmath>

#include "doctest.h"
#include "nearopt/errors.hpp"
#include "nearopt/model.hpp"
#include "support/fixtures.hpp"

using namespace nearopt;
using model::Generator;

namespace {

// Present value of a level payment stream, summed year by year.
double annuity_oracle(double capital, int years, double rate) {
  double pv_factor = 0.0;
  for (int t = 1; t <= years; ++t) pv_factor += std::pow(1.0 + rate, -t);
  return capital / pv_factor;
}

model::Network one_bus(std::vector<Generator> gens) {
  model::Network n;
  n.buses.push_back({"a", "a"});
  n.generators = std::move(gens);
  return n;
}

Generator gen(const std::string& id, const std::string& carrier, bool ext, double p_nom = 0.0) {
  Generator g;
  g.id = id;
  g.bus = "a";
  g.carrier = carrier;
  g.extendable = ext;
  g.p_nom = p_nom;
  return g;
}

double investment(const model::ExpansionProblem& p, const lp::Solution& s, const std::string& element) {
  const auto inv = lp::project_investments(s.x, p.index);
  return inv.at(p.index.investment_slot(element));
}

}  // namespace

TEST_CASE("annuity") {
  CHECK(model::annuity(1000, 1, 0.0) == 1000.0);
  CHECK(model::annuity(1000, 2, 0.0) == 500.0);
  CHECK(model::annuity(1000, 20, 0.07) == doctest::Approx(annuity_oracle(1000, 20, 0.07)).epsilon(1e-12));
  CHECK(model::annuity(1000, 20, 0.07) == doctest::Approx(94.393).epsilon(1e-5));
  CHECK_THROWS_AS(model::annuity(1000, 0, 0.07), InvalidArgument);
  CHECK_THROWS_AS(model::annuity(1000, 10, 1.0), InvalidArgument);
}

TEST_CASE("expansion: single extendable generator meets flat load") {
  auto g = gen("g", "wind", true);
  g.capital_cost = 100.0;
  g.marginal_cost = 1.0;
  const auto net = one_bus({g});
  auto sc = testing::flat_scenario("s", 4, 3.0);
  sc.loads["a"] = {1, 1, 1, 1};
  const auto p = model::build_expansion_lp(net, sc, 1.0, {});
  const auto sol = lp::solve(p.lp);
  REQUIRE(sol.optimal());
  CHECK(investment(p, sol, "g") == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(p.weight == doctest::Approx(8760.0 / 12.0));
}

TEST_CASE("expansion: link sized to the remote peak") {
  model::Network n;
  n.buses = {{"A", "A"}, {"B", "B"}};
  auto g = gen("gA", "gas", true);
  g.bus = "A";
  g.capital_cost = 10.0;
  n.generators.push_back(g);
  model::Link l;
  l.id = "A-B";
  l.from = "A";
  l.to = "B";
  l.extendable = true;
  l.capital_cost = 5.0;
  n.links.push_back(l);
  auto sc = testing::flat_scenario("s", 4, 1.0);
  sc.loads["B"] = {3, 7, 5, 2};
  const auto p = model::build_expansion_lp(n, sc, 1.0, {});
  const auto sol = lp::solve(p.lp);
  REQUIRE(sol.optimal());
  CHECK(investment(p, sol, "A-B") == doctest::Approx(7.0).epsilon(1e-7));
}

TEST_CASE("expansion: zero CO2 budget forbids emitting dispatch") {
  auto gas = gen("gas", "gas", true);
  auto wind = gen("wind", "onwind", true);
  wind.capacity_factor = "cf";
  auto net = one_bus({gas, wind});
  net.reference_emissions = 1000.0;
  auto costs = testing::test_costs();
  auto sc = testing::flat_scenario("s", 6, 3.0);
  sc.loads["a"] = {5, 6, 7, 6, 5, 4};
  sc.capacity_factors["cf"] = {0.2, 0.5, 0.9, 0.4, 0.3, 0.6};
  const auto p = model::build_expansion_lp(net, sc, 0.0, costs);
  const auto sol = lp::solve(p.lp);
  REQUIRE(sol.optimal());
  for (int c = 0; c < p.index.size(); ++c) {
    const auto& info = p.index.at(c);
    if (info.element == "gas" && info.role == lp::Role::operational) CHECK(std::abs(sol.x[c]) <= 1e-7);
  }
  CHECK(model::emissions(p, sol.x) <= 1e-6);
}

TEST_CASE("expansion: errors") {
  auto g = gen("g", "wind", true);
  g.capital_cost = 1.0;
  g.capacity_factor = "missing";
  auto sc = testing::flat_scenario("s", 2, 1.0);
  sc.loads["a"] = {1, 1};
  CHECK_THROWS_AS(model::build_expansion_lp(one_bus({g}), sc, 1.0, {}), DataError);
  auto empty = testing::flat_scenario("e", 0, 1.0);
  CHECK_THROWS_AS(model::build_expansion_lp(one_bus({}), empty, 1.0, {}), InvalidArgument);
  auto nocost = gen("n", "mystery", true);
  CHECK_THROWS_AS(model::build_expansion_lp(one_bus({nocost}), sc, 1.0, {}), DataError);

  model::Network loop;
  loop.buses = {{"a", "a"}};
  loop.links.push_back({"l", "a", "a"});
  CHECK_THROWS_AS(loop.validate(), DataError);
}

TEST_CASE("expansion: deterministic, conserving, homogeneous, monotone") {
  const auto sys = testing::small_system(3, 16, 42);
  const auto costs = testing::test_costs();
  auto net = sys.network;
  net.reference_emissions = 2.0e5;

  const auto a = model::build_expansion_lp(net, sys.scenario, 0.5, costs);
  const auto b = model::build_expansion_lp(net, sys.scenario, 0.5, costs);
  CHECK(a.lp == b.lp);

  const auto sol = lp::solve(a.lp);
  REQUIRE(sol.optimal());
  // Nodal balance residuals, read off the equality rows tagged per bus.
  for (int i = 0; i < a.lp.num_eq(); ++i) {
    const double resid = a.lp.eq().activity(i, sol.x) - a.lp.eq().rhs(i);
    CHECK(std::abs(resid) <= 1e-6 * 150.0);
  }

  // Scale loads, existing capacities and emission reference by lambda.
  const double lambda = 3.0;
  auto scaled_net = net;
  for (auto& l : scaled_net.links) l.p_nom *= lambda;
  scaled_net.reference_emissions *= lambda;
  auto scaled_sc = sys.scenario;
  for (auto& [bus, s] : scaled_sc.loads)
    for (double& v : s) v *= lambda;
  const auto scaled = lp::solve(model::build_expansion_lp(scaled_net, scaled_sc, 0.5, costs).lp);
  REQUIRE(scaled.optimal());
  CHECK(scaled.objective == doctest::Approx(lambda * sol.objective).epsilon(1e-6));

  double previous = lp::kInf;
  for (double frac : {0.1, 0.3, 0.6, 1.0}) {
    const auto s = lp::solve(model::build_expansion_lp(net, sys.scenario, frac, costs).lp);
    REQUIRE(s.optimal());
    CHECK(s.objective <= previous * (1 + 1e-7));
    previous = s.objective;
  }
}

TEST_CASE("dispatch: expansion optimum needs no shedding") {
  const auto sys = testing::small_system(2, 16, 7);
  const auto costs = testing::test_costs();
  const auto p = model::build_expansion_lp(sys.network, sys.scenario, 1.0, costs);
  const auto sol = lp::solve(p.lp);
  REQUIRE(sol.optimal());
  const auto fixed = model::investments_by_element(p, lp::project_investments(sol.x, p.index));
  const auto d = model::build_dispatch_lp(sys.network, fixed, sys.scenario, lp::kInf, std::nullopt, 7300.0, costs);
  const auto ds = lp::solve(d.lp);
  REQUIRE(ds.optimal());
  CHECK(model::shed_energy(d, ds.x) <= 1e-6 * d.annual_load[0]);
  // Same capacities, so the minimal operating cost agrees (up to solver
  // tolerance on the scale of the whole objective).
  CHECK(std::abs(model::operational_cost(d, ds.x) - model::operational_cost(p, sol.x)) <= 1e-6 * sol.objective);

  // With its own operational cost as budget the design still serves all load.
  const auto budgeted = model::build_dispatch_lp(sys.network, fixed, sys.scenario, lp::kInf,
                                                 model::operational_cost(p, sol.x) * (1 + 1e-7), 7300.0, costs);
  const auto bs = lp::solve(budgeted.lp);
  REQUIRE(bs.optimal());
  CHECK(model::shed_energy(budgeted, bs.x) <= 1e-6 * budgeted.annual_load[0]);
}

TEST_CASE("dispatch: empty system sheds everything") {
  const auto sys = testing::small_system(2, 8, 3);
  const auto costs = testing::test_costs();
  const auto p = model::build_expansion_lp(sys.network, sys.scenario, 1.0, costs);
  std::map<std::string, double> zero;
  for (const auto& e : p.investment_elements) zero[e] = 0.0;
  auto net = sys.network;
  for (auto& l : net.links) l.p_nom = 0.0;
  const auto d = model::build_dispatch_lp(net, zero, sys.scenario, lp::kInf, std::nullopt, 7300.0, costs);
  const auto s = lp::solve(d.lp);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(7300.0 * d.annual_load[0]).epsilon(1e-7));
  CHECK(model::shed_energy(d, s.x) == doctest::Approx(d.annual_load[0]).epsilon(1e-7));

  std::map<std::string, double> negative = zero;
  negative.begin()->second = -1.0;
  CHECK_THROWS_AS(model::build_dispatch_lp(net, negative, sys.scenario, lp::kInf, std::nullopt, 7300.0, costs),
                  InvalidArgument);
  std::map<std::string, double> partial = zero;
  partial.erase(partial.begin());
  CHECK_THROWS_AS(model::build_dispatch_lp(net, partial, sys.scenario, lp::kInf, std::nullopt, 7300.0, costs),
                  InvalidArgument);
}

TEST_CASE("dispatch: free generation fits a zero budget") {
  auto g = gen("wind", "onwind", false, 10.0);
  g.marginal_cost = 0.0;
  const auto net = one_bus({g});
  auto sc = testing::flat_scenario("s", 4, 3.0);
  sc.loads["a"] = {4, 5, 6, 7};
  const auto d = model::build_dispatch_lp(net, {}, sc, lp::kInf, 0.0, 7300.0, {});
  const auto s = lp::solve(d.lp);
  REQUIRE(s.optimal());
  CHECK(model::shed_energy(d, s.x) <= 1e-9);
}

TEST_CASE("dispatch: budget monotonicity and hydro availability") {
  auto gas = gen("gas", "gas", false, 100.0);
  gas.marginal_cost = 50.0;
  auto hydro = gen("hydro", "hydro", false, 10.0);
  hydro.inflow = "inflow";
  const auto net = one_bus({gas, hydro});
  auto sc = testing::flat_scenario("s", 3, 2.0);
  sc.loads["a"] = {20, 20, 20};
  sc.inflows["inflow"] = {40.0, 10.0, 0.0};  // MWh per 2h step: caps 10, 5, 0 MW
  double previous_shed = lp::kInf;
  for (double budget : {0.0, 1e4, 1e5, 1e7}) {
    const auto d = model::build_dispatch_lp(net, {}, sc, lp::kInf, budget, 7300.0, {});
    const auto s = lp::solve(d.lp);
    REQUIRE(s.optimal());
    const double shed = model::shed_energy(d, s.x);
    CHECK(shed <= previous_shed + 1e-6);
    previous_shed = shed;
    if (budget == 0.0) {
      // Only hydro runs: 10 + 5 + 0 MW out of 20 MW each step.
      CHECK(shed == doctest::Approx(d.weight * 2.0 * (10 + 15 + 20)).epsilon(1e-7));
    }
  }
  CHECK(previous_shed <= 1e-6);
}

TEST_CASE("network and cost JSON round trip") {
  const auto sys = testing::small_system(2, 4, 1);
  const auto net = model::network_from_json(model::to_json(sys.network));
  CHECK(model::to_json(net) == model::to_json(sys.network));
  const auto costs = model::costs_from_json(model::to_json(testing::test_costs()));
  CHECK(costs.technologies.at("gas").marginal_cost == 60.0);
  CHECK_THROWS_AS(model::network_from_json("{\"buses\": 3}"), DataError);
  const auto resolved = model::resolve_costs(sys.network, costs);
  CHECK(*resolved.generators[0].capital_cost == doctest::Approx(model::annuity(420000.0, 25, 0.07)));
  CHECK(*resolved.links[0].capital_cost == doctest::Approx(model::annuity(400.0 * 200.0, 40, 0.07)));
}
