#pragma once

#include <random>
#include <string>

#include "nearopt/model.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::testing {

inline model::CostAssumptions test_costs() {
  model::CostAssumptions c;
  c.technologies["solar"] = {420000.0, 0.0, 25.0, 0.07, 0.0, 0.0};
  c.technologies["onwind"] = {1100000.0, 0.0, 25.0, 0.07, 0.0, 0.0};
  c.technologies["gas"] = {550000.0, 0.0, 30.0, 0.07, 60.0, 0.4};
  c.technologies["battery"] = {150000.0, 140000.0, 15.0, 0.07, 0.0, 0.0};
  c.technologies["transmission"] = {400.0, 0.0, 40.0, 0.07, 0.0, 0.0};
  return c;
}

inline scenario::Scenario flat_scenario(const std::string& id, int steps, double step_hours) {
  scenario::Scenario s;
  s.id = id;
  s.snapshots = steps;
  s.step_hours = step_hours;
  return s;
}

// Buses b0..b{n-1} in a line, each with solar, onshore wind and gas, a battery
// at b0, extendable links between neighbours. Capacity factors and loads are
// seeded so instances differ.
struct SmallSystem {
  model::Network network;
  scenario::Scenario scenario;
};

inline SmallSystem small_system(int buses, int steps, std::uint64_t seed, double step_hours = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SmallSystem out;
  auto& net = out.network;
  auto& sc = out.scenario;
  sc = flat_scenario("s" + std::to_string(seed), steps, step_hours);
  for (int b = 0; b < buses; ++b) {
    const std::string id = "b" + std::to_string(b);
    net.buses.push_back({id, id});
    model::Generator solar{id + "-solar", id, "solar"};
    solar.extendable = true;
    solar.capacity_factor = solar.id;
    model::Generator wind{id + "-wind", id, "onwind"};
    wind.extendable = true;
    wind.capacity_factor = wind.id;
    model::Generator gas{id + "-gas", id, "gas"};
    gas.extendable = true;
    net.generators.push_back(solar);
    net.generators.push_back(wind);
    net.generators.push_back(gas);

    const double phase = u(rng) * 6.28;
    const double wind_level = 0.25 + 0.2 * u(rng);
    scenario::Series cf_s(steps), cf_w(steps), load(steps);
    double w = wind_level;
    for (int t = 0; t < steps; ++t) {
      const double hour = std::fmod(t * step_hours, 24.0);
      cf_s[t] = std::max(0.0, std::sin(3.14159265 * (hour - 6.0) / 12.0)) * (0.6 + 0.4 * u(rng));
      w = std::clamp(0.8 * w + 0.2 * (wind_level + 0.5 * std::sin(phase + t * 0.3)) + 0.1 * (u(rng) - 0.5), 0.0, 1.0);
      cf_w[t] = w;
      load[t] = 80.0 + 40.0 * u(rng) + 30.0 * std::sin(3.14159265 * hour / 24.0);
    }
    sc.capacity_factors[solar.id] = cf_s;
    sc.capacity_factors[wind.id] = cf_w;
    sc.loads[id] = load;
    if (b > 0) {
      model::Link l;
      l.id = "b" + std::to_string(b - 1) + "-" + id;
      l.from = "b" + std::to_string(b - 1);
      l.to = id;
      l.p_nom = 20.0;
      l.extendable = true;
      l.length = 200.0;
      net.links.push_back(l);
    }
  }
  model::Storage bat;
  bat.id = "b0-battery";
  bat.bus = "b0";
  net.storage.push_back(bat);
  net.reference_emissions = 0.0;
  return out;
}

}  // namespace nearopt::testing
