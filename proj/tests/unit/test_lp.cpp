#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nearopt/errors.hpp"
#include "nearopt/lp.hpp"
#include "support/random_lp.hpp"
#include "support/tableau_oracle.hpp"

using namespace nearopt;
using lp::kInf;

namespace {

lp::SolverOptions with(lp::Method m) {
  lp::SolverOptions o;
  o.method = m;
  return o;
}

const lp::Method kMethods[] = {lp::Method::simplex, lp::Method::interior_point};

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// Two capacities (investment) feeding one demand over three steps.
struct ToyExpansion {
  lp::LinearProgram lp;
  lp::VariableIndex index;
  int cap_a = -1;
  int cap_b = -1;
};

ToyExpansion toy_expansion() {
  ToyExpansion t;
  t.cap_a = t.lp.add_column(10.0, 0.0, kInf, "cap_a");
  t.index.add({"a", lp::Role::investment, "solar"});
  t.cap_b = t.lp.add_column(14.0, 0.0, kInf, "cap_b");
  t.index.add({"b", lp::Role::investment, "wind"});
  const double cf_a[] = {1.0, 0.2, 0.6};
  const double load[] = {1.0, 1.0, 1.0};
  for (int s = 0; s < 3; ++s) {
    const int ga = t.lp.add_column(1.0, 0.0, kInf);
    t.index.add({"a", lp::Role::operational, "solar", s});
    const int gb = t.lp.add_column(2.0, 0.0, kInf);
    t.index.add({"b", lp::Role::operational, "wind", s});
    t.lp.add_le({{ga, 1.0}, {t.cap_a, -cf_a[s]}}, 0.0);
    t.lp.add_le({{gb, 1.0}, {t.cap_b, -1.0}}, 0.0);
    t.lp.add_eq({{ga, 1.0}, {gb, 1.0}}, load[s]);
  }
  return t;
}

lp::ReductionMap toy_map(const ToyExpansion& t) {
  return lp::ReductionMap({{"solar", {{0, t.cap_a, 10.0}}}, {"wind", {{1, t.cap_b, 14.0}}}});
}

}  // namespace

TEST_CASE("solve: single bounded variable") {
  for (auto m : kMethods) {
    lp::LinearProgram p;
    p.add_column(-1.0, 0.0, kInf);
    p.add_le({{0, 1.0}}, 3.0);
    const auto sol = lp::solve(p, with(m));
    REQUIRE(sol.optimal());
    CHECK(sol.x[0] == doctest::Approx(3.0).epsilon(1e-7));
    CHECK(sol.objective == doctest::Approx(-3.0).epsilon(1e-7));
    CHECK(sol.le_duals[0] == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("solve: contradictory rows are infeasible") {
  for (auto m : kMethods) {
    lp::LinearProgram p;
    p.add_column(0.0, -kInf, kInf);
    p.add_le({{0, 1.0}}, 0.0);
    p.add_le({{0, -1.0}}, -1.0);
    CHECK(lp::solve(p, with(m)).status == lp::Status::infeasible);
  }
}

TEST_CASE("solve: unbounded ray is reported") {
  for (auto m : kMethods) {
    lp::LinearProgram p;
    p.add_column(-1.0, 0.0, kInf);
    p.add_column(0.0, 0.0, kInf);
    p.add_le({{0, 1.0}, {1, -1.0}}, 1.0);
    CHECK(lp::solve(p, with(m)).status == lp::Status::unbounded);
  }
}

TEST_CASE("solve: invalid data is rejected") {
  lp::LinearProgram p;
  p.add_column(1.0, 2.0, 1.0);
  CHECK_THROWS_AS(lp::solve(p), InvalidArgument);
  lp::LinearProgram q;
  q.add_column(std::nan(""), 0.0, 1.0);
  CHECK_THROWS_AS(lp::solve(q), InvalidArgument);
}

TEST_CASE("solve: random LPs agree with the tableau oracle") {
  int optimal = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const auto p = testing::random_lp(seed, 20, 30, seed % 7 == 0);
    const auto ref = testing::tableau_oracle(p);
    REQUIRE(ref.status != lp::Status::solver_failure);
    for (auto m : kMethods) {
      const auto sol = lp::solve(p, with(m));
      INFO("seed " << seed << " method " << sol.method);
      REQUIRE(sol.status == ref.status);
      if (ref.status != lp::Status::optimal) continue;
      CHECK(rel_diff(sol.objective, ref.objective) <= 1e-6);
      CHECK(p.max_violation(sol.x) <= 1e-6);
      CHECK(rel_diff(lp::dual_objective(p, sol), sol.objective) <= 1e-6);
      for (double d : sol.le_duals) CHECK(d >= 0.0);
    }
    if (ref.status == lp::Status::optimal) ++optimal;
  }
  CHECK(optimal >= 20);
}

TEST_CASE("solve: fixed and upper-only columns") {
  for (auto m : kMethods) {
    lp::LinearProgram p;
    p.add_column(1.0, 2.0, 2.0);
    p.add_column(-1.0, -kInf, 5.0);
    p.add_le({{0, 1.0}, {1, 1.0}}, 4.0);
    const auto sol = lp::solve(p, with(m));
    REQUIRE(sol.optimal());
    CHECK(sol.x[0] == doctest::Approx(2.0));
    CHECK(sol.x[1] == doctest::Approx(2.0).epsilon(1e-7));
    CHECK(sol.objective == doctest::Approx(0.0).epsilon(1e-7));
  }
}

TEST_CASE("project_investments and embedding") {
  lp::VariableIndex index;
  index.add({"g1", lp::Role::operational, "solar", 0});
  index.add({"b", lp::Role::investment, "wind"});
  index.add({"g1", lp::Role::operational, "solar", 1});
  index.add({"a", lp::Role::investment, "solar"});
  const std::vector<double> x = {9.0, 7.0, 8.0, 5.0};
  const auto inv = lp::project_investments(x, index);
  REQUIRE(inv.size() == 2);
  // Ordered by element id: "a" then "b".
  CHECK(inv[0] == 5.0);
  CHECK(inv[1] == 7.0);
  CHECK(lp::project_investments(lp::embed_investments(inv, index), index) == inv);

  lp::VariableIndex ops;
  ops.add({"g", lp::Role::operational, "gas", 0});
  CHECK(lp::project_investments(std::vector<double>{1.0}, ops).empty());
  CHECK_THROWS_AS(ops.add({"x", lp::Role::investment, "gas", 3}), InvalidArgument);
}

TEST_CASE("aggregate is a weighted group sum and linear") {
  lp::ReductionMap one({{"g", {{0, 0, 2.0}}}});
  CHECK(lp::aggregate(std::vector<double>{3.0}, one) == std::vector<double>{6.0});
  CHECK(lp::aggregate(std::vector<double>{0.0}, one) == std::vector<double>{0.0});

  lp::ReductionMap map({{"a", {{0, 0, 1.5}, {2, 2, 0.5}}}, {"b", {{1, 1, 3.0}}}});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(4), q(4), mix(4);
    const double a = u(rng), b = u(rng);
    for (int j = 0; j < 4; ++j) {
      p[j] = u(rng);
      q[j] = u(rng);
      mix[j] = a * p[j] + b * q[j];
    }
    const auto yp = lp::aggregate(p, map);
    const auto yq = lp::aggregate(q, map);
    const auto ym = lp::aggregate(mix, map);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(ym[i] - (a * yp[i] + b * yq[i])) < 1e-12 * 100);
  }
  CHECK_THROWS_AS(lp::ReductionMap({{"a", {{0, 0, 1.0}}}, {"b", {{0, 0, 1.0}}}}), InvalidArgument);
  CHECK_THROWS_AS(lp::ReductionMap({{"a", {{0, 0, 0.0}}}}), InvalidArgument);
}

TEST_CASE("apply_cost_slack") {
  auto t = toy_expansion();
  const auto base = lp::solve(t.lp);
  REQUIRE(base.optimal());
  const double c_opt = base.objective;

  const auto tight = lp::apply_cost_slack(t.lp, c_opt);
  CHECK(tight.cost() == t.lp.cost());
  CHECK(tight.num_le() == t.lp.num_le() + 1);
  CHECK(tight.max_violation(base.x) <= 1e-7 * c_opt);
  const auto again = lp::solve(tight);
  REQUIRE(again.optimal());
  CHECK(again.objective == doctest::Approx(c_opt).epsilon(1e-7));

  CHECK(lp::solve(lp::apply_cost_slack(t.lp, c_opt * (1 - 1e-3))).status ==
        lp::Status::infeasible);

  // Nested: every vertex found under the tight bound is feasible for the loose one.
  const auto loose = lp::apply_cost_slack(t.lp, 1.05 * c_opt);
  const auto map = toy_map(t);
  for (double d0 : {-1.0, 0.0, 1.0}) {
    for (double d1 : {-1.0, 0.0, 1.0}) {
      if (d0 == 0.0 && d1 == 0.0) continue;
      const std::vector<double> d = {d0, d1};
      const auto s = lp::solve(lp::set_reduced_objective(tight, map, d));
      REQUIRE(s.optimal());
      CHECK(loose.max_violation(s.x) <= 1e-7 * c_opt);
    }
  }
  CHECK_THROWS_AS(lp::apply_cost_slack(t.lp, kInf), InvalidArgument);
}

TEST_CASE("set_reduced_objective") {
  auto t = toy_expansion();
  const auto map = toy_map(t);
  const std::vector<double> e1 = {1.0, 0.0};
  const auto r = lp::set_reduced_objective(t.lp, map, e1);
  for (int j = 0; j < r.num_columns(); ++j) {
    if (j == t.cap_a) CHECK(r.cost()[j] == -10.0);
    else CHECK(r.cost()[j] == 0.0);
  }
  CHECK_THROWS_AS(lp::set_reduced_objective(t.lp, map, std::vector<double>{0.0, 0.0}),
                  InvalidArgument);

  // Support points dominate every earlier point in their own direction, and
  // positive scaling leaves the optimum unchanged.
  const double c_opt = lp::solve(t.lp).objective;
  const auto slacked = lp::apply_cost_slack(t.lp, 1.1 * c_opt);
  std::vector<std::vector<double>> found;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 12; ++trial) {
    std::vector<double> d = {g(rng), g(rng)};
    const auto s = lp::solve(lp::set_reduced_objective(slacked, map, d));
    REQUIRE(s.optimal());
    const auto y = lp::aggregate(lp::project_investments(s.x, t.index), map);
    const double own = d[0] * y[0] + d[1] * y[1];
    for (const auto& prev : found) CHECK(own >= d[0] * prev[0] + d[1] * prev[1] - 1e-6 * c_opt);
    found.push_back(y);

    std::vector<double> d2 = {2 * d[0], 2 * d[1]};
    const auto s2 = lp::solve(lp::set_reduced_objective(slacked, map, d2));
    const auto y2 = lp::aggregate(lp::project_investments(s2.x, t.index), map);
    CHECK(d[0] * y2[0] + d[1] * y2[1] == doctest::Approx(own).epsilon(1e-7));
  }
}

TEST_CASE("fix_reduced_point") {
  auto t = toy_expansion();
  const auto map = toy_map(t);
  const auto base = lp::solve(t.lp);
  const auto y_opt = lp::aggregate(lp::project_investments(base.x, t.index), map);
  const double tol = lp::default_fix_tolerance(y_opt);
  const auto fixed = lp::fix_reduced_point(t.lp, map, y_opt, tol);
  CHECK(fixed.num_le() == t.lp.num_le() + 4);
  const auto s = lp::solve(fixed);
  REQUIRE(s.optimal());
  CHECK(s.objective == doctest::Approx(base.objective).epsilon(1e-6));
  const auto y = lp::aggregate(lp::project_investments(s.x, t.index), map);
  for (int i = 0; i < 2; ++i) CHECK(std::abs(y[i] - y_opt[i]) <= tol * (1 + 1e-9));

  // Above the largest solar investment reachable under a 5% cost slack.
  const auto slacked = lp::apply_cost_slack(t.lp, 1.05 * base.objective);
  const auto top = lp::solve(lp::set_reduced_objective(slacked, map, std::vector<double>{1, 0}));
  auto y_out = lp::aggregate(lp::project_investments(top.x, t.index), map);
  y_out[0] *= 1.5;
  CHECK(lp::solve(lp::fix_reduced_point(slacked, map, y_out, 1e-6)).status ==
        lp::Status::infeasible);
}

TEST_CASE("write_lp_format emits sections") {
  auto t = toy_expansion();
  std::ostringstream os;
  lp::write_lp_format(os, t.lp);
  const std::string s = os.str();
  CHECK(s.find("Minimize") != std::string::npos);
  CHECK(s.find("Subject To") != std::string::npos);
  CHECK(s.find("Bounds") != std::string::npos);
  CHECK(s.find("cap_a") != std::string::npos);
  CHECK(s.rfind("End") != std::string::npos);
}
