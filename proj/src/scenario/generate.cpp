#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "nearopt/errors.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::scenario {

void Scenario::validate() const {
  if (snapshots <= 0) throw InvalidArgument("scenario " + id + " has no snapshots");
  if (!(step_hours > 0.0)) throw DataError("scenario " + id + " has nonpositive step length");
  auto length = [&](const std::map<std::string, Series>& m, const char* what) {
    for (const auto& [key, s] : m)
      if (static_cast<int>(s.size()) != snapshots)
        throw DataError(std::string(what) + " series " + key + " has " + std::to_string(s.size()) +
                        " entries, expected " + std::to_string(snapshots));
  };
  length(capacity_factors, "capacity-factor");
  length(loads, "load");
  length(inflows, "inflow");
  for (const auto& [key, s] : capacity_factors)
    for (double v : s)
      if (!(v >= 0.0 && v <= 1.0)) throw DataError("capacity factor outside [0,1] in " + key);
  for (const auto& [key, s] : loads)
    for (double v : s)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("negative or non-finite load at " + key);
  for (const auto& [key, s] : inflows)
    for (double v : s)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("negative or non-finite inflow at " + key);
  const double days = snapshots * step_hours / 24.0;
  for (const auto& [key, s] : daily_temperature) {
    if (static_cast<double>(s.size()) < std::ceil(days - 1e-9))
      throw DataError("temperature series " + key + " shorter than the horizon");
    for (double v : s)
      if (!std::isfinite(v)) throw DataError("non-finite temperature at " + key);
  }
}

bool PerturbationConfig::zero() const {
  return cf_amplitude == 0.0 && cf_phase_steps == 0.0 && temperature_shift == 0.0 && inflow_scale == 0.0 &&
         load_scale == 0.0;
}

namespace {

Series hourly_solar(std::mt19937_64& rng, int days, double mean, double variability) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Series out(24 * days);
  double total = 0.0;
  for (int d = 0; d < days; ++d) {
    const double clear = std::clamp(1.0 - variability * 0.6 * u(rng), 0.1, 1.0);
    for (int h = 0; h < 24; ++h) {
      const double s = std::max(0.0, std::sin(std::numbers::pi * (h - 6.0) / 12.0));
      out[24 * d + h] = s * clear;
      total += out[24 * d + h];
    }
  }
  const double factor = mean * out.size() / std::max(total, 1e-12);
  for (double& v : out) v = std::clamp(v * factor, 0.0, 1.0);
  return out;
}

Series hourly_wind(std::mt19937_64& rng, int days, double mean, double variability) {
  std::normal_distribution<double> g;
  Series z(24 * days);
  double state = g(rng);
  for (auto& v : z) {
    state = 0.97 * state + std::sqrt(1 - 0.97 * 0.97) * g(rng);
    v = state;
  }
  // Logistic transform with the offset tuned by bisection to hit the mean.
  auto mean_for = [&](double offset) {
    double s = 0.0;
    for (double v : z) s += 1.0 / (1.0 + std::exp(-(1.5 * variability * v + offset)));
    return s / z.size();
  };
  double lo = -10.0, hi = 10.0;
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_for(mid) < mean ? lo : hi) = mid;
  }
  const double offset = 0.5 * (lo + hi);
  Series out(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) out[t] = 1.0 / (1.0 + std::exp(-(1.5 * variability * z[t] + offset)));
  return out;
}

Series daily_temperatures(std::mt19937_64& rng, int days, double mean) {
  std::normal_distribution<double> g;
  Series out(days);
  double anomaly = 2.0 * g(rng);
  for (int d = 0; d < days; ++d) {
    anomaly = 0.8 * anomaly + 1.5 * g(rng);
    out[d] = mean + anomaly;
  }
  return out;
}

}  // namespace

Scenario synthetic_scenario(const SyntheticSpec& spec) {
  if (spec.days < 1) throw InvalidArgument("synthetic scenario needs at least one day");
  std::mt19937_64 rng(spec.seed);
  Scenario s;
  s.id = spec.id;
  s.step_hours = spec.step_hours;
  s.snapshots = static_cast<int>(std::lround(24.0 * spec.days / spec.step_hours));
  for (const auto& c : spec.capacity_factors) {
    Series hourly;
    if (c.kind == "solar") hourly = hourly_solar(rng, spec.days, c.mean, c.variability);
    else if (c.kind == "wind") hourly = hourly_wind(rng, spec.days, c.mean, c.variability);
    else throw InvalidArgument("unknown synthetic series kind " + c.kind);
    s.capacity_factors[c.id] = average_to_steps(hourly, spec.step_hours);
  }
  for (const auto& [region, mean] : spec.region_temperature)
    s.daily_temperature[region] = daily_temperatures(rng, spec.days, mean);
  std::normal_distribution<double> g;
  for (const auto& [plant, mean] : spec.inflow_means) {
    Series inflow(s.snapshots);
    double level = 1.0;
    for (auto& v : inflow) {
      level = std::max(0.2, 0.95 * level + 0.05 + 0.05 * g(rng));
      v = mean * level;
    }
    s.inflows[plant] = inflow;
  }
  const Calendar cal = Calendar::consecutive(spec.days, spec.first_weekday);
  for (const auto& [bus, mean] : spec.mean_load) {
    auto region = spec.bus_region.count(bus) ? spec.bus_region.at(bus) : bus;
    auto it = s.daily_temperature.find(region);
    if (it == s.daily_temperature.end()) throw InvalidArgument("no temperature region " + region + " for bus " + bus);
    const auto hourly = synthesize_load(default_load_model(mean), it->second, cal, spec.load_scale);
    s.loads[bus] = average_to_steps(hourly.load, spec.step_hours);
  }
  s.validate();
  return s;
}

std::vector<Scenario> generate_scenarios(const Scenario& base, int n, std::uint64_t seed,
                                         const PerturbationConfig& p, const LoadSynthesis* synthesis) {
  if (n < 1) throw InvalidArgument("generate_scenarios needs n >= 1");
  if (!(p.cf_amplitude >= 0.0 && p.cf_amplitude <= 1.0))
    throw InvalidArgument("capacity-factor amplitude band must lie in [0,1]");
  if (!(p.cf_phase_steps >= 0.0 && p.temperature_shift >= 0.0 && p.inflow_scale >= 0.0 && p.inflow_scale <= 1.0 &&
        p.load_scale >= 0.0 && p.load_scale <= 1.0))
    throw InvalidArgument("perturbation bands must be nonnegative and relative bands at most 1");
  base.validate();

  std::vector<Scenario> out;
  for (int i = 0; i < n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Scenario s = base;
    s.id = n == 1 ? base.id : base.id + "-" + std::to_string(i);
    if (p.zero()) {
      out.push_back(std::move(s));
      continue;
    }
    for (auto& [key, series] : s.capacity_factors) {
      const double amp = 1.0 + p.cf_amplitude * u(rng);
      const int shift = static_cast<int>(std::lround(p.cf_phase_steps * u(rng)));
      const Series src = series;
      const int T = static_cast<int>(src.size());
      for (int t = 0; t < T; ++t) series[t] = std::clamp(amp * src[((t - shift) % T + T) % T], 0.0, 1.0);
    }
    for (auto& [key, series] : s.daily_temperature) {
      const double shift = p.temperature_shift * u(rng);
      for (double& v : series) v += shift;
    }
    for (auto& [key, series] : s.inflows) {
      const double scale = 1.0 + p.inflow_scale * u(rng);
      for (double& v : series) v *= scale;
    }
    if (synthesis) {
      for (const auto& [bus, params] : synthesis->by_bus) {
        auto region = synthesis->bus_region.count(bus) ? synthesis->bus_region.at(bus) : bus;
        auto it = s.daily_temperature.find(region);
        if (it == s.daily_temperature.end()) throw DataError("no temperature series for region " + region);
        const auto hourly = synthesize_load(params, it->second, synthesis->calendar, synthesis->scale);
        Series steps = average_to_steps(hourly.load, s.step_hours);
        steps.resize(s.snapshots);
        s.loads[bus] = std::move(steps);
      }
    }
    for (auto& [key, series] : s.loads) {
      const double scale = 1.0 + p.load_scale * u(rng);
      for (double& v : series) v *= scale;
    }
    s.validate();
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace nearopt::scenario
