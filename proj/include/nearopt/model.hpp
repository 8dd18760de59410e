#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nearopt/lp.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::model {

struct Bus {
  std::string id;
  std::string region;  // temperature region, defaults to the bus id
};

// Transport link; flows are bounded by +-(existing + new) capacity.
struct Link {
  std::string id;
  std::string from;
  std::string to;
  std::string carrier = "transmission";
  double p_nom = 0.0;         // MW existing
  bool extendable = false;
  double p_nom_max = lp::kInf;
  double length = 1.0;        // multiplies the per-unit technology cost
  std::optional<double> capital_cost;  // EUR/MW/a, annuitised
};

struct Generator {
  std::string id;
  std::string bus;
  std::string carrier;
  double p_nom = 0.0;
  bool extendable = false;
  double p_nom_max = lp::kInf;
  std::optional<double> capital_cost;   // EUR/MW/a
  std::optional<double> marginal_cost;  // EUR/MWh
  std::optional<double> emission;       // tCO2/MWh
  std::string capacity_factor;  // series id; empty means always available
  std::string inflow;           // series id for inflow-limited plants
};

struct Storage {
  std::string id;
  std::string bus;
  std::string carrier = "battery";
  double e_nom = 0.0;  // MWh existing
  double p_nom = 0.0;  // MW existing
  bool extendable = true;
  double efficiency = 0.9;     // round trip
  double standing_loss = 0.0;  // fraction of state lost per step
  std::optional<double> energy_capital_cost;  // EUR/MWh/a
  std::optional<double> power_capital_cost;   // EUR/MW/a
};

struct Network {
  std::vector<Bus> buses;
  std::vector<Link> links;
  std::vector<Generator> generators;
  std::vector<Storage> storage;
  double reference_emissions = 0.0;  // tCO2/a the CO2 fraction refers to

  void validate() const;
};

struct TechnologyCost {
  double capital_cost = 0.0;         // EUR/MW overnight (per km for links)
  double energy_capital_cost = 0.0;  // EUR/MWh overnight, storage only
  double lifetime = 25.0;
  double discount_rate = 0.07;
  double marginal_cost = 0.0;
  double emission_factor = 0.0;
};

struct CostAssumptions {
  std::map<std::string, TechnologyCost> technologies;
  void validate() const;
};

double annuity(double capital_cost, double lifetime, double discount_rate);

// Fills unset element costs from the technology table; explicit element
// values win. Throws DataError when an extendable element stays without cost.
Network resolve_costs(const Network& network, const CostAssumptions& costs);

Network network_from_json(const std::string& text);
CostAssumptions costs_from_json(const std::string& text);
std::string to_json(const Network& network);
std::string to_json(const CostAssumptions& costs);

// Bookkeeping shared by expansion, dispatch and joint problems.
struct ExpansionProblem {
  lp::LinearProgram lp;
  lp::VariableIndex index;
  double co2_limit = lp::kInf;
  std::string scenario_id;

  // Annuitised capital cost per investment slot (same order as project_investments).
  std::vector<double> capital_costs;
  std::vector<std::string> investment_elements;
  std::vector<std::string> investment_groups;
  // Operational cost rows per scenario block: sum of weighted marginal costs.
  std::vector<std::vector<lp::Term>> opex_terms;
  std::vector<std::vector<lp::Term>> emission_terms;
  std::vector<std::vector<int>> shed_columns;
  std::vector<double> annual_load;  // MWh/a per block
  double weight = 1.0;              // snapshot weighting
  double step_hours = 1.0;
  int budget_row = -1;
};

ExpansionProblem build_expansion_lp(const Network& network, const scenario::Scenario& scenario,
                                    double co2_fraction, const CostAssumptions& costs);

// Shared investment columns and one operational block per scenario; the
// objective is capex + mean operational cost.
ExpansionProblem build_joint_expansion_lp(const Network& network,
                                          const std::vector<scenario::Scenario>& scenarios,
                                          double co2_fraction, const CostAssumptions& costs);

// `fixed` maps investment element ids to new capacity. The objective is
// operational cost plus shed_cost per MWh shed; capital cost is excluded.
ExpansionProblem build_dispatch_lp(const Network& network, const std::map<std::string, double>& fixed,
                                   const scenario::Scenario& scenario, double co2_limit,
                                   std::optional<double> op_budget, double shed_cost,
                                   const CostAssumptions& costs);

double capex(const ExpansionProblem& p, std::span<const double> investments);
double operational_cost(const ExpansionProblem& p, std::span<const double> x, int block = 0);
double emissions(const ExpansionProblem& p, std::span<const double> x, int block = 0);
double shed_energy(const ExpansionProblem& p, std::span<const double> x, int block = 0);

std::map<std::string, double> investments_by_element(const ExpansionProblem& p,
                                                     std::span<const double> investments);

// --- reduction to technology groups -----------------------------------------

enum class WeightSource { capital_cost, unity };

struct GroupSpec {
  std::string label;
  std::vector<std::string> tags;  // technology groups summed into this coordinate
};

// transmission, solar, onwind, offwind, gas
std::vector<GroupSpec> default_groups();

// One coordinate per group, summing the investment columns whose technology
// tag is listed, weighted by annuitised capital cost or 1. Throws DataError
// when a group matches no investment column.
lp::ReductionMap reduction_map(const ExpansionProblem& p, const std::vector<GroupSpec>& groups,
                               WeightSource weights = WeightSource::capital_cost);

}  // namespace nearopt::model
