#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "nearopt/lp.hpp"
#include "nearopt/model.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::validate {

inline constexpr double kDefaultShedCost = 7300.0;  // EUR/MWh

struct ScenarioResult {
  std::string scenario;
  std::string status;
  double load = 0.0;              // MWh/a
  double shed_energy = 0.0;       // MWh/a, with the budget row
  double shed_cost = 0.0;         // EUR/a
  double operational_cost = 0.0;  // EUR/a, shedding excluded
  double emissions = 0.0;         // tCO2/a
  double budget = lp::kInf;       // EUR/a
  // Shedding without the budget row (technical) and the remainder that only
  // the budget forces (over budget). NaN when not computed.
  double technical_shed = 0.0;
  double over_budget_shed = 0.0;
};

struct ValidationReport {
  std::string design;
  std::vector<ScenarioResult> rows;
  double total_load = 0.0;
  double total_shed = 0.0;
  double total_shed_cost = 0.0;
  double total_operational_cost = 0.0;
  double relative_shedding = 0.0;  // total_shed / total_load
  double budget_used = 0.0;        // sum of operational cost
};

struct StressOptions {
  double shed_cost = kDefaultShedCost;
  double co2_limit = lp::kInf;  // tCO2/a per scenario
  bool split_components = true;  // re-solve without the budget row
  int parallel = 1;
  lp::SolverOptions solver;
};

// Dispatch-only solves of `design` (new capacity per investment element) in
// every scenario. `budgets` is empty (no budget row) or one EUR/a value per
// scenario. Throws SolverFailure if a dispatch LP is not solved to optimality.
ValidationReport stress_test(const std::string& name, const model::Network& network,
                             const model::CostAssumptions& costs, const std::map<std::string, double>& design,
                             const std::vector<scenario::Scenario>& scenarios, const std::vector<double>& budgets,
                             const StressOptions& options = {});

// Minimal operating cost of `design` per scenario, times (1 + slack): the
// common budget every design must keep to.
std::vector<double> design_budgets(const model::Network& network, const model::CostAssumptions& costs,
                                   const std::map<std::string, double>& design,
                                   const std::vector<scenario::Scenario>& scenarios, const StressOptions& options = {},
                                   double slack = 1e-7);

struct SummaryRow {
  std::string design;
  double total_shed = 0.0;
  double total_load = 0.0;
  double relative_shedding = 0.0;
  double technical_shed = 0.0;
  double over_budget_shed = 0.0;
};

// One row per report, ascending by total shedding (stable for ties).
std::vector<SummaryRow> summarize(const std::vector<ValidationReport>& reports);

std::string to_json(const ValidationReport& report);
void write_report_csv(std::ostream& out, const ValidationReport& report);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace nearopt::validate
