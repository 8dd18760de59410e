#include <cmath>
#include <set>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/model.hpp"

namespace nearopt::model {

using nlohmann::json;

double annuity(double capital_cost, double lifetime, double discount_rate) {
  if (!(lifetime >= 1.0)) throw InvalidArgument("annuity: lifetime must be at least one year");
  if (!(discount_rate >= 0.0 && discount_rate < 1.0))
    throw InvalidArgument("annuity: discount rate must lie in [0, 1)");
  if (discount_rate == 0.0) return capital_cost / lifetime;
  return capital_cost * discount_rate / (1.0 - std::pow(1.0 + discount_rate, -lifetime));
}

void Network::validate() const {
  std::set<std::string> bus_ids;
  for (const auto& b : buses)
    if (!bus_ids.insert(b.id).second) throw DataError("duplicate bus " + b.id);
  if (bus_ids.empty()) throw DataError("network has no buses");
  std::set<std::string> ids;
  auto unique = [&](const std::string& id) {
    if (id.empty() || !ids.insert(id).second) throw DataError("duplicate or empty element id '" + id + "'");
  };
  auto bus = [&](const std::string& b, const std::string& who) {
    if (!bus_ids.count(b)) throw DataError(who + " refers to unknown bus " + b);
  };
  auto nonneg = [](double v, const std::string& what) {
    if (!(v >= 0.0)) throw DataError(what + " must be >= 0");
  };
  for (const auto& l : links) {
    unique(l.id);
    bus(l.from, l.id);
    bus(l.to, l.id);
    if (l.from == l.to) throw DataError("link " + l.id + " connects a bus to itself");
    nonneg(l.p_nom, l.id + " p_nom");
    nonneg(l.length, l.id + " length");
  }
  for (const auto& g : generators) {
    unique(g.id);
    bus(g.bus, g.id);
    nonneg(g.p_nom, g.id + " p_nom");
    if (g.extendable && !g.inflow.empty()) throw DataError(g.id + ": inflow plants are not extendable");
  }
  for (const auto& s : storage) {
    unique(s.id);
    bus(s.bus, s.id);
    nonneg(s.e_nom, s.id + " e_nom");
    nonneg(s.p_nom, s.id + " p_nom");
    if (!(s.efficiency > 0.0 && s.efficiency <= 1.0)) throw DataError(s.id + ": efficiency outside (0,1]");
    if (!(s.standing_loss >= 0.0 && s.standing_loss < 1.0))
      throw DataError(s.id + ": standing loss outside [0,1)");
  }
}

void CostAssumptions::validate() const {
  for (const auto& [name, t] : technologies) {
    if (!(t.lifetime >= 1.0)) throw DataError(name + ": lifetime < 1");
    if (!(t.discount_rate >= 0.0 && t.discount_rate < 1.0)) throw DataError(name + ": discount rate outside [0,1)");
    if (!(t.capital_cost >= 0.0 && t.energy_capital_cost >= 0.0 && t.marginal_cost >= 0.0 &&
          t.emission_factor >= 0.0))
      throw DataError(name + ": negative cost");
  }
}

Network resolve_costs(const Network& network, const CostAssumptions& costs) {
  network.validate();
  costs.validate();
  Network out = network;
  auto tech = [&](const std::string& carrier) -> const TechnologyCost* {
    auto it = costs.technologies.find(carrier);
    return it == costs.technologies.end() ? nullptr : &it->second;
  };
  auto require = [](bool extendable, const std::optional<double>& c, const std::string& id) {
    if (!extendable) return;
    if (!c || !std::isfinite(*c) || *c < 0.0) throw DataError(id + ": extendable element without a capital cost");
  };
  for (auto& l : out.links) {
    if (const auto* t = tech(l.carrier); t && !l.capital_cost)
      l.capital_cost = annuity(t->capital_cost * l.length, t->lifetime, t->discount_rate);
    require(l.extendable, l.capital_cost, l.id);
  }
  for (auto& g : out.generators) {
    if (const auto* t = tech(g.carrier)) {
      if (!g.capital_cost) g.capital_cost = annuity(t->capital_cost, t->lifetime, t->discount_rate);
      if (!g.marginal_cost) g.marginal_cost = t->marginal_cost;
      if (!g.emission) g.emission = t->emission_factor;
    }
    if (!g.marginal_cost) g.marginal_cost = 0.0;
    if (!g.emission) g.emission = 0.0;
    require(g.extendable, g.capital_cost, g.id);
  }
  for (auto& s : out.storage) {
    if (const auto* t = tech(s.carrier)) {
      if (!s.power_capital_cost) s.power_capital_cost = annuity(t->capital_cost, t->lifetime, t->discount_rate);
      if (!s.energy_capital_cost)
        s.energy_capital_cost = annuity(t->energy_capital_cost, t->lifetime, t->discount_rate);
    }
    require(s.extendable, s.power_capital_cost, s.id);
    require(s.extendable, s.energy_capital_cost, s.id);
  }
  return out;
}

namespace {

std::optional<double> opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

double max_or_inf(const json& j) {
  auto v = opt(j, "p_nom_max");
  return v ? *v : lp::kInf;
}

void put(json& j, const char* key, const std::optional<double>& v) {
  if (v) j[key] = *v;
}

}  // namespace

Network network_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    Network n;
    n.reference_emissions = j.value("reference_emissions", 0.0);
    for (const auto& b : j.at("buses")) {
      Bus bus{b.at("id").get<std::string>(), b.value("region", std::string())};
      if (bus.region.empty()) bus.region = bus.id;
      n.buses.push_back(std::move(bus));
    }
    for (const auto& l : j.value("links", json::array())) {
      Link link;
      link.id = l.at("id");
      link.from = l.at("from");
      link.to = l.at("to");
      link.carrier = l.value("carrier", link.carrier);
      link.p_nom = l.value("p_nom", 0.0);
      link.extendable = l.value("extendable", false);
      link.p_nom_max = max_or_inf(l);
      link.length = l.value("length", 1.0);
      link.capital_cost = opt(l, "capital_cost");
      n.links.push_back(std::move(link));
    }
    for (const auto& g : j.value("generators", json::array())) {
      Generator gen;
      gen.id = g.at("id");
      gen.bus = g.at("bus");
      gen.carrier = g.at("carrier");
      gen.p_nom = g.value("p_nom", 0.0);
      gen.extendable = g.value("extendable", false);
      gen.p_nom_max = max_or_inf(g);
      gen.capital_cost = opt(g, "capital_cost");
      gen.marginal_cost = opt(g, "marginal_cost");
      gen.emission = opt(g, "emission");
      gen.capacity_factor = g.value("capacity_factor", std::string());
      gen.inflow = g.value("inflow", std::string());
      n.generators.push_back(std::move(gen));
    }
    for (const auto& s : j.value("storage", json::array())) {
      Storage st;
      st.id = s.at("id");
      st.bus = s.at("bus");
      st.carrier = s.value("carrier", st.carrier);
      st.e_nom = s.value("e_nom", 0.0);
      st.p_nom = s.value("p_nom", 0.0);
      st.extendable = s.value("extendable", true);
      st.efficiency = s.value("efficiency", st.efficiency);
      st.standing_loss = s.value("standing_loss", 0.0);
      st.energy_capital_cost = opt(s, "energy_capital_cost");
      st.power_capital_cost = opt(s, "power_capital_cost");
      n.storage.push_back(std::move(st));
    }
    n.validate();
    return n;
  } catch (const json::exception& e) {
    throw DataError(std::string("network config: ") + e.what());
  }
}

CostAssumptions costs_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    CostAssumptions c;
    for (const auto& [name, t] : j.at("technologies").items()) {
      TechnologyCost tc;
      tc.capital_cost = t.value("capital_cost", 0.0);
      tc.energy_capital_cost = t.value("energy_capital_cost", 0.0);
      tc.lifetime = t.value("lifetime", tc.lifetime);
      tc.discount_rate = t.value("discount_rate", tc.discount_rate);
      tc.marginal_cost = t.value("marginal_cost", 0.0);
      tc.emission_factor = t.value("emission_factor", 0.0);
      c.technologies[name] = tc;
    }
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("cost config: ") + e.what());
  }
}

std::string to_json(const Network& n) {
  json j;
  j["reference_emissions"] = n.reference_emissions;
  j["buses"] = json::array();
  for (const auto& b : n.buses) j["buses"].push_back({{"id", b.id}, {"region", b.region}});
  j["links"] = json::array();
  for (const auto& l : n.links) {
    json o = {{"id", l.id}, {"from", l.from}, {"to", l.to}, {"carrier", l.carrier},
              {"p_nom", l.p_nom}, {"extendable", l.extendable}, {"length", l.length}};
    if (std::isfinite(l.p_nom_max)) o["p_nom_max"] = l.p_nom_max;
    put(o, "capital_cost", l.capital_cost);
    j["links"].push_back(o);
  }
  j["generators"] = json::array();
  for (const auto& g : n.generators) {
    json o = {{"id", g.id}, {"bus", g.bus}, {"carrier", g.carrier}, {"p_nom", g.p_nom},
              {"extendable", g.extendable}};
    if (std::isfinite(g.p_nom_max)) o["p_nom_max"] = g.p_nom_max;
    put(o, "capital_cost", g.capital_cost);
    put(o, "marginal_cost", g.marginal_cost);
    put(o, "emission", g.emission);
    if (!g.capacity_factor.empty()) o["capacity_factor"] = g.capacity_factor;
    if (!g.inflow.empty()) o["inflow"] = g.inflow;
    j["generators"].push_back(o);
  }
  j["storage"] = json::array();
  for (const auto& s : n.storage) {
    json o = {{"id", s.id}, {"bus", s.bus}, {"carrier", s.carrier}, {"e_nom", s.e_nom},
              {"p_nom", s.p_nom}, {"extendable", s.extendable}, {"efficiency", s.efficiency},
              {"standing_loss", s.standing_loss}};
    put(o, "energy_capital_cost", s.energy_capital_cost);
    put(o, "power_capital_cost", s.power_capital_cost);
    j["storage"].push_back(o);
  }
  return j.dump(2);
}

std::string to_json(const CostAssumptions& c) {
  json j;
  j["technologies"] = json::object();
  for (const auto& [name, t] : c.technologies) {
    j["technologies"][name] = {{"capital_cost", t.capital_cost},
                               {"energy_capital_cost", t.energy_capital_cost},
                               {"lifetime", t.lifetime},
                               {"discount_rate", t.discount_rate},
                               {"marginal_cost", t.marginal_cost},
                               {"emission_factor", t.emission_factor}};
  }
  return j.dump(2);
}

}  // namespace nearopt::model
