#include <algorithm>

#include "nearopt/errors.hpp"
#include "nearopt/model.hpp"

namespace nearopt::model {

std::vector<GroupSpec> default_groups() {
  return {{"transmission", {"transmission"}},
          {"solar", {"solar"}},
          {"onwind", {"onwind"}},
          {"offwind", {"offwind"}},
          {"gas", {"gas"}}};
}

lp::ReductionMap reduction_map(const ExpansionProblem& p, const std::vector<GroupSpec>& groups,
                               WeightSource weights) {
  const auto& columns = p.index.investment_columns();
  std::vector<lp::ReductionGroup> out;
  for (const auto& g : groups) {
    lp::ReductionGroup rg{g.label, {}};
    for (std::size_t slot = 0; slot < columns.size(); ++slot) {
      const auto& info = p.index.at(columns[slot]);
      if (std::find(g.tags.begin(), g.tags.end(), info.group) == g.tags.end()) continue;
      const double w = weights == WeightSource::unity ? 1.0 : p.capital_costs.at(slot);
      rg.members.push_back({static_cast<int>(slot), columns[slot], w});
    }
    if (rg.members.empty()) throw DataError("reduction group " + g.label + " matches no investment column");
    out.push_back(std::move(rg));
  }
  return lp::ReductionMap(std::move(out));
}

}  // namespace nearopt::model
