#include <algorithm>
#include <cmath>
#include <exception>
#include <optional>
#include <ostream>

#include "json.hpp"
#include "nearopt/errors.hpp"
#include "nearopt/validate.hpp"

namespace nearopt::validate {

namespace {

struct Dispatch {
  model::ExpansionProblem problem;
  lp::Solution solution;
};

Dispatch dispatch(const model::Network& net, const model::CostAssumptions& costs,
                  const std::map<std::string, double>& design, const scenario::Scenario& s,
                  std::optional<double> budget, const StressOptions& o) {
  Dispatch d{model::build_dispatch_lp(net, design, s, o.co2_limit, budget, o.shed_cost, costs), {}};
  d.solution = lp::solve(d.problem.lp, o.solver);
  if (!d.solution.optimal())
    throw SolverFailure("dispatch LP for scenario " + s.id + " ended " + lp::to_string(d.solution.status) +
                        " despite load shedding");
  return d;
}

template <class F>
void for_each_scenario(int n, int parallel, F&& f) {
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic) num_threads(std::max(parallel, 1)) if (parallel > 1)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

ValidationReport stress_test(const std::string& name, const model::Network& network,
                             const model::CostAssumptions& costs, const std::map<std::string, double>& design,
                             const std::vector<scenario::Scenario>& scenarios, const std::vector<double>& budgets,
                             const StressOptions& options) {
  if (!budgets.empty() && budgets.size() != scenarios.size())
    throw InvalidArgument("need one budget per scenario or none");
  const int n = static_cast<int>(scenarios.size());
  ValidationReport report;
  report.design = name;
  report.rows.resize(n);
  for_each_scenario(n, options.parallel, [&](int i) {
    std::optional<double> budget;
    if (!budgets.empty()) budget = budgets[i];
    const Dispatch d = dispatch(network, costs, design, scenarios[i], budget, options);
    ScenarioResult& r = report.rows[i];
    r.scenario = scenarios[i].id;
    r.status = lp::to_string(d.solution.status);
    r.load = d.problem.annual_load[0];
    r.shed_energy = model::shed_energy(d.problem, d.solution.x);
    r.shed_cost = options.shed_cost * r.shed_energy;
    r.operational_cost = model::operational_cost(d.problem, d.solution.x);
    r.emissions = model::emissions(d.problem, d.solution.x);
    r.budget = budget.value_or(lp::kInf);
    if (!budget) {
      r.technical_shed = r.shed_energy;
    } else if (options.split_components) {
      const Dispatch free = dispatch(network, costs, design, scenarios[i], std::nullopt, options);
      r.technical_shed = std::min(model::shed_energy(free.problem, free.solution.x), r.shed_energy);
      r.over_budget_shed = r.shed_energy - r.technical_shed;
    } else {
      r.technical_shed = r.over_budget_shed = std::nan("");
    }
  });
  for (const auto& r : report.rows) {
    report.total_load += r.load;
    report.total_shed += r.shed_energy;
    report.total_shed_cost += r.shed_cost;
    report.total_operational_cost += r.operational_cost;
  }
  report.budget_used = report.total_operational_cost;
  report.relative_shedding = report.total_load > 0.0 ? report.total_shed / report.total_load : 0.0;
  return report;
}

std::vector<double> design_budgets(const model::Network& network, const model::CostAssumptions& costs,
                                   const std::map<std::string, double>& design,
                                   const std::vector<scenario::Scenario>& scenarios, const StressOptions& options,
                                   double slack) {
  const int n = static_cast<int>(scenarios.size());
  std::vector<double> out(n);
  for_each_scenario(n, options.parallel, [&](int i) {
    const Dispatch d = dispatch(network, costs, design, scenarios[i], std::nullopt, options);
    out[i] = model::operational_cost(d.problem, d.solution.x) * (1.0 + slack);
  });
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<ValidationReport>& reports) {
  std::vector<SummaryRow> rows;
  for (const auto& r : reports) {
    SummaryRow s{r.design, r.total_shed, r.total_load, r.relative_shedding, 0.0, 0.0};
    for (const auto& row : r.rows) {
      s.technical_shed += row.technical_shed;
      s.over_budget_shed += row.over_budget_shed;
    }
    rows.push_back(s);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SummaryRow& a, const SummaryRow& b) { return a.total_shed < b.total_shed; });
  return rows;
}

std::string to_json(const ValidationReport& report) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["design"] = report.design;
  j["total_load"] = report.total_load;
  j["total_shed"] = report.total_shed;
  j["total_shed_cost"] = report.total_shed_cost;
  j["total_operational_cost"] = report.total_operational_cost;
  j["relative_shedding"] = report.relative_shedding;
  j["budget_used"] = report.budget_used;
  j["scenarios"] = json::array();
  for (const auto& r : report.rows)
    j["scenarios"].push_back({{"scenario", r.scenario},
                              {"status", r.status},
                              {"load", r.load},
                              {"shed_energy", r.shed_energy},
                              {"shed_cost", r.shed_cost},
                              {"operational_cost", r.operational_cost},
                              {"emissions", r.emissions},
                              {"budget", num(r.budget)},
                              {"technical_shed", num(r.technical_shed)},
                              {"over_budget_shed", num(r.over_budget_shed)}});
  return j.dump(2);
}

void write_report_csv(std::ostream& out, const ValidationReport& report) {
  const auto precision = out.precision(17);
  out << "scenario,status,load,shed_energy,shed_cost,operational_cost,emissions,budget,technical_shed,"
         "over_budget_shed\n";
  for (const auto& r : report.rows)
    out << r.scenario << ',' << r.status << ',' << r.load << ',' << r.shed_energy << ',' << r.shed_cost << ','
        << r.operational_cost << ',' << r.emissions << ',' << r.budget << ',' << r.technical_shed << ','
        << r.over_budget_shed << '\n';
  out.precision(precision);
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  const auto precision = out.precision(17);
  out << "design,total_shed,total_load,relative_shedding,technical_shed,over_budget_shed\n";
  for (const auto& r : rows)
    out << r.design << ',' << r.total_shed << ',' << r.total_load << ',' << r.relative_shedding << ','
        << r.technical_shed << ',' << r.over_budget_shed << '\n';
  out.precision(precision);
}

}  // namespace nearopt::validate
