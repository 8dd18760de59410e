#include <algorithm>
#include <cmath>

#include "nearopt/errors.hpp"
#include "nearopt/model.hpp"

namespace nearopt::model {

namespace {

using scenario::Scenario;

constexpr double kHoursPerYear = 8760.0;

struct Capacity {
  int column = -1;       // investment column, -1 when not extendable
  double existing = 0.0;
};

class Builder {
public:
  Builder(const Network& net, ExpansionProblem& out) : net_(net), out_(out) {}

  // Investment columns. With `fixed`, each is pinned to the given value at zero cost.
  void add_investments(const std::map<std::string, double>* fixed) {
    auto add = [&](const std::string& element, const std::string& group, double cost,
                   double max_new) -> int {
      double lo = 0.0;
      double hi = max_new;
      if (fixed) {
        auto it = fixed->find(element);
        if (it == fixed->end()) throw InvalidArgument("no fixed capacity for " + element);
        if (!(it->second >= 0.0)) throw InvalidArgument("negative fixed capacity for " + element);
        lo = hi = it->second;
        cost = 0.0;
      }
      const int col = out_.lp.add_column(cost, lo, hi, "new:" + element);
      out_.index.add({element, lp::Role::investment, group});
      return col;
    };
    for (const auto& l : net_.links) {
      Capacity c{-1, l.p_nom};
      if (l.extendable) c.column = add(l.id, l.carrier, *l.capital_cost, headroom(l.p_nom_max, l.p_nom));
      links_.push_back(c);
    }
    for (const auto& g : net_.generators) {
      Capacity c{-1, g.p_nom};
      if (g.extendable) c.column = add(g.id, g.carrier, *g.capital_cost, headroom(g.p_nom_max, g.p_nom));
      gens_.push_back(c);
    }
    for (const auto& s : net_.storage) {
      Capacity e{-1, s.e_nom};
      Capacity p{-1, s.p_nom};
      if (s.extendable) {
        e.column = add(s.id + "/energy", s.carrier, *s.energy_capital_cost, lp::kInf);
        p.column = add(s.id + "/power", s.carrier, *s.power_capital_cost, lp::kInf);
      }
      energy_.push_back(e);
      power_.push_back(p);
    }
    // Slot metadata in projection order.
    for (int col : out_.index.investment_columns()) {
      const auto& info = out_.index.at(col);
      out_.investment_elements.push_back(info.element);
      out_.investment_groups.push_back(info.group);
      out_.capital_costs.push_back(capital_cost_of(info.element));
    }
  }

  // One operational block. `objective_scale` multiplies the block's operating
  // cost in the objective; the stored opex terms stay unscaled (EUR/a).
  void add_block(const Scenario& s, double objective_scale, double co2_limit,
                 std::optional<double> shed_cost) {
    s.validate();
    if (s.snapshots <= 0) throw InvalidArgument("zero-length horizon");
    const int T = s.snapshots;
    const double h = s.step_hours;
    const double w = kHoursPerYear / (T * h);
    out_.weight = w;
    out_.step_hours = h;
    const std::string tag = s.id.empty() ? std::string() : s.id + ":";

    std::vector<lp::Term> opex;
    std::vector<lp::Term> co2;
    std::vector<int> shed;
    double annual_load = 0.0;

    // Availability per generator and step.
    std::vector<const std::vector<double>*> cf(net_.generators.size(), nullptr);
    std::vector<const std::vector<double>*> inflow(net_.generators.size(), nullptr);
    for (std::size_t i = 0; i < net_.generators.size(); ++i) {
      const auto& g = net_.generators[i];
      if (!g.capacity_factor.empty()) {
        auto it = s.capacity_factors.find(g.capacity_factor);
        if (it == s.capacity_factors.end())
          throw DataError("scenario " + s.id + " lacks capacity-factor series " + g.capacity_factor);
        cf[i] = &it->second;
      }
      if (!g.inflow.empty()) {
        auto it = s.inflows.find(g.inflow);
        if (it == s.inflows.end()) throw DataError("scenario " + s.id + " lacks inflow series " + g.inflow);
        inflow[i] = &it->second;
      }
    }
    std::vector<const std::vector<double>*> load(net_.buses.size(), nullptr);
    for (std::size_t b = 0; b < net_.buses.size(); ++b) {
      auto it = s.loads.find(net_.buses[b].id);
      if (it != s.loads.end()) load[b] = &it->second;
    }
    std::map<std::string, int> bus_pos;
    for (std::size_t b = 0; b < net_.buses.size(); ++b) bus_pos[net_.buses[b].id] = static_cast<int>(b);

    const std::size_t nst = net_.storage.size();
    std::vector<std::vector<int>> soc(nst, std::vector<int>(T));
    std::vector<std::vector<int>> charge(nst, std::vector<int>(T));
    std::vector<std::vector<int>> discharge(nst, std::vector<int>(T));

    std::vector<std::vector<lp::Term>> balance(net_.buses.size());
    for (int t = 0; t < T; ++t) {
      for (auto& row : balance) row.clear();
      const std::string step = ":" + std::to_string(t);

      for (std::size_t i = 0; i < net_.generators.size(); ++i) {
        const auto& g = net_.generators[i];
        double avail = cf[i] ? (*cf[i])[t] : 1.0;
        if (inflow[i]) avail = g.p_nom > 0.0 ? std::min(1.0, (*inflow[i])[t] / (g.p_nom * h)) : 0.0;
        const double mc = *g.marginal_cost;
        const double hi = gens_[i].column >= 0 ? lp::kInf : avail * g.p_nom;
        const int col = out_.lp.add_column(objective_scale * w * h * mc, 0.0, hi, tag + g.id + step);
        out_.index.add({g.id, lp::Role::operational, g.carrier, t});
        if (gens_[i].column >= 0)
          out_.lp.add_le({{col, 1.0}, {gens_[i].column, -avail}}, avail * g.p_nom);
        if (mc != 0.0) opex.push_back({col, w * h * mc});
        if (*g.emission != 0.0) co2.push_back({col, w * h * *g.emission});
        balance[bus_pos[g.bus]].push_back({col, 1.0});
      }

      for (std::size_t i = 0; i < net_.links.size(); ++i) {
        const auto& l = net_.links[i];
        const int col = links_[i].column >= 0
                            ? out_.lp.add_column(0.0, -lp::kInf, lp::kInf, tag + l.id + step)
                            : out_.lp.add_column(0.0, -l.p_nom, l.p_nom, tag + l.id + step);
        out_.index.add({l.id, lp::Role::operational, l.carrier, t});
        if (links_[i].column >= 0) {
          out_.lp.add_le({{col, 1.0}, {links_[i].column, -1.0}}, l.p_nom);
          out_.lp.add_le({{col, -1.0}, {links_[i].column, -1.0}}, l.p_nom);
        }
        balance[bus_pos[l.from]].push_back({col, -1.0});
        balance[bus_pos[l.to]].push_back({col, 1.0});
      }

      for (std::size_t i = 0; i < nst; ++i) {
        const auto& st = net_.storage[i];
        const bool ext = power_[i].column >= 0;
        const double pmax = ext ? lp::kInf : st.p_nom;
        const double emax = ext ? lp::kInf : st.e_nom;
        charge[i][t] = out_.lp.add_column(0.0, 0.0, pmax, tag + st.id + ":charge" + step);
        out_.index.add({st.id, lp::Role::operational, st.carrier, t});
        discharge[i][t] = out_.lp.add_column(0.0, 0.0, pmax, tag + st.id + ":discharge" + step);
        out_.index.add({st.id, lp::Role::operational, st.carrier, t});
        soc[i][t] = out_.lp.add_column(0.0, 0.0, emax, tag + st.id + ":soc" + step);
        out_.index.add({st.id, lp::Role::operational, st.carrier, t});
        if (ext) {
          out_.lp.add_le({{charge[i][t], 1.0}, {power_[i].column, -1.0}}, st.p_nom);
          out_.lp.add_le({{discharge[i][t], 1.0}, {power_[i].column, -1.0}}, st.p_nom);
          out_.lp.add_le({{soc[i][t], 1.0}, {energy_[i].column, -1.0}}, st.e_nom);
        }
        balance[bus_pos[st.bus]].push_back({discharge[i][t], 1.0});
        balance[bus_pos[st.bus]].push_back({charge[i][t], -1.0});
      }

      for (std::size_t b = 0; b < net_.buses.size(); ++b) {
        const double demand = load[b] ? (*load[b])[t] : 0.0;
        annual_load += w * h * demand;
        if (shed_cost) {
          const int col = out_.lp.add_column(objective_scale * w * h * *shed_cost, 0.0, demand,
                                             tag + "shed:" + net_.buses[b].id + step);
          out_.index.add({net_.buses[b].id, lp::Role::operational, "shed", t});
          shed.push_back(col);
          balance[b].push_back({col, 1.0});
        }
        out_.lp.add_eq(balance[b], demand);
      }
    }

    // Cyclic state of charge: e_t = (1-loss) e_{t-1} + eta h c_t - h d_t / eta.
    for (std::size_t i = 0; i < nst; ++i) {
      const auto& st = net_.storage[i];
      const double eta = std::sqrt(st.efficiency);
      for (int t = 0; t < T; ++t) {
        const int prev = soc[i][(t + T - 1) % T];
        if (T == 1) {
          out_.lp.add_eq({{soc[i][t], st.standing_loss},
                          {charge[i][t], -eta * h},
                          {discharge[i][t], h / eta}},
                         0.0);
          continue;
        }
        out_.lp.add_eq({{soc[i][t], 1.0},
                        {prev, -(1.0 - st.standing_loss)},
                        {charge[i][t], -eta * h},
                        {discharge[i][t], h / eta}},
                       0.0);
      }
    }

    if (std::isfinite(co2_limit)) out_.lp.add_le(co2, co2_limit);
    out_.opex_terms.push_back(std::move(opex));
    out_.emission_terms.push_back(std::move(co2));
    out_.shed_columns.push_back(std::move(shed));
    out_.annual_load.push_back(annual_load);
  }

private:
  static double headroom(double p_nom_max, double p_nom) {
    return std::isfinite(p_nom_max) ? std::max(0.0, p_nom_max - p_nom) : lp::kInf;
  }

  double capital_cost_of(const std::string& element) const {
    for (const auto& l : net_.links)
      if (l.id == element) return *l.capital_cost;
    for (const auto& g : net_.generators)
      if (g.id == element) return *g.capital_cost;
    for (const auto& s : net_.storage) {
      if (s.id + "/energy" == element) return *s.energy_capital_cost;
      if (s.id + "/power" == element) return *s.power_capital_cost;
    }
    throw InvalidArgument("unknown investment element " + element);
  }

  const Network& net_;
  ExpansionProblem& out_;
  std::vector<Capacity> links_;
  std::vector<Capacity> gens_;
  std::vector<Capacity> energy_;
  std::vector<Capacity> power_;
};

double co2_cap(const Network& net, double co2_fraction) {
  if (!(co2_fraction >= 0.0)) throw InvalidArgument("co2 fraction must be >= 0");
  return net.reference_emissions > 0.0 ? co2_fraction * net.reference_emissions : lp::kInf;
}

}  // namespace

ExpansionProblem build_expansion_lp(const Network& network, const Scenario& scenario,
                                    double co2_fraction, const CostAssumptions& costs) {
  const Network net = resolve_costs(network, costs);
  ExpansionProblem out;
  out.scenario_id = scenario.id;
  out.co2_limit = co2_cap(net, co2_fraction);
  Builder b(net, out);
  b.add_investments(nullptr);
  b.add_block(scenario, 1.0, out.co2_limit, std::nullopt);
  return out;
}

ExpansionProblem build_joint_expansion_lp(const Network& network, const std::vector<Scenario>& scenarios,
                                          double co2_fraction, const CostAssumptions& costs) {
  if (scenarios.empty()) throw InvalidArgument("joint problem needs at least one scenario");
  const Network net = resolve_costs(network, costs);
  ExpansionProblem out;
  for (const auto& s : scenarios) out.scenario_id += (out.scenario_id.empty() ? "" : "+") + s.id;
  out.co2_limit = co2_cap(net, co2_fraction);
  Builder b(net, out);
  b.add_investments(nullptr);
  const double share = 1.0 / static_cast<double>(scenarios.size());
  for (const auto& s : scenarios) b.add_block(s, share, out.co2_limit, std::nullopt);
  return out;
}

ExpansionProblem build_dispatch_lp(const Network& network, const std::map<std::string, double>& fixed,
                                   const Scenario& scenario, double co2_limit,
                                   std::optional<double> op_budget, double shed_cost,
                                   const CostAssumptions& costs) {
  if (!(shed_cost >= 0.0)) throw InvalidArgument("shed cost must be >= 0");
  const Network net = resolve_costs(network, costs);
  ExpansionProblem out;
  out.scenario_id = scenario.id;
  out.co2_limit = co2_limit;
  Builder b(net, out);
  b.add_investments(&fixed);
  b.add_block(scenario, 1.0, co2_limit, shed_cost);
  if (op_budget) out.budget_row = out.lp.add_le(out.opex_terms[0], *op_budget);
  return out;
}

namespace {

double dot(const std::vector<lp::Term>& terms, std::span<const double> x) {
  double s = 0.0;
  for (const auto& t : terms) s += t.value * x[t.column];
  return s;
}

}  // namespace

double capex(const ExpansionProblem& p, std::span<const double> investments) {
  if (investments.size() != p.capital_costs.size()) throw InvalidArgument("investment vector size");
  double s = 0.0;
  for (std::size_t i = 0; i < investments.size(); ++i) s += p.capital_costs[i] * investments[i];
  return s;
}

double operational_cost(const ExpansionProblem& p, std::span<const double> x, int block) {
  return dot(p.opex_terms.at(block), x);
}

double emissions(const ExpansionProblem& p, std::span<const double> x, int block) {
  return dot(p.emission_terms.at(block), x);
}

double shed_energy(const ExpansionProblem& p, std::span<const double> x, int block) {
  double s = 0.0;
  for (int c : p.shed_columns.at(block)) s += x[c];
  return s * p.weight * p.step_hours;
}

std::map<std::string, double> investments_by_element(const ExpansionProblem& p,
                                                     std::span<const double> investments) {
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < p.investment_elements.size(); ++i) out[p.investment_elements[i]] = investments[i];
  return out;
}

}  // namespace nearopt::model
