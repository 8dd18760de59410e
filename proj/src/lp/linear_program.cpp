#include "nearopt/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <sstream>

#include "nearopt/errors.hpp"

namespace nearopt::lp {

int SparseRows::append(std::span<const Term> terms, double rhs) {
  for (const Term& t : terms) {
    if (t.value == 0.0) continue;
    index_.push_back(t.column);
    value_.push_back(t.value);
  }
  start_.push_back(static_cast<int>(index_.size()));
  rhs_.push_back(rhs);
  return size() - 1;
}

double SparseRows::activity(int row, std::span<const double> x) const {
  double sum = 0.0;
  for (int k = start_[row]; k < start_[row + 1]; ++k) sum += value_[k] * x[index_[k]];
  return sum;
}

int LinearProgram::add_column(double cost, double lower, double upper, std::string name) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  if (!name.empty() || !names_.empty()) {
    names_.resize(cost_.size() - 1);
    names_.push_back(std::move(name));
  }
  return num_columns() - 1;
}

void LinearProgram::set_bounds(int column, double lower, double upper) {
  lower_[column] = lower;
  upper_[column] = upper;
}

void LinearProgram::validate() const {
  const int n = num_columns();
  for (int j = 0; j < n; ++j) {
    if (!std::isfinite(cost_[j])) throw InvalidArgument("non-finite objective coefficient");
    if (std::isnan(lower_[j]) || std::isnan(upper_[j]) || lower_[j] == kInf ||
        upper_[j] == -kInf)
      throw InvalidArgument("invalid bound on column " + std::to_string(j));
    if (lower_[j] > upper_[j])
      throw InvalidArgument("crossed bounds on column " + std::to_string(j));
  }
  for (const SparseRows* rows : {&le_, &eq_}) {
    for (int i = 0; i < rows->size(); ++i) {
      if (!std::isfinite(rows->rhs(i))) throw InvalidArgument("non-finite right-hand side");
      auto cols = rows->columns(i);
      auto vals = rows->values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (cols[k] < 0 || cols[k] >= n) throw InvalidArgument("row references unknown column");
        if (!std::isfinite(vals[k])) throw InvalidArgument("non-finite matrix coefficient");
      }
    }
  }
}

double LinearProgram::objective(std::span<const double> x) const {
  double sum = offset_;
  for (int j = 0; j < num_columns(); ++j) sum += cost_[j] * x[j];
  return sum;
}

double LinearProgram::max_violation(std::span<const double> x) const {
  double worst = 0.0;
  for (int j = 0; j < num_columns(); ++j) {
    worst = std::max(worst, lower_[j] - x[j]);
    worst = std::max(worst, x[j] - upper_[j]);
  }
  for (int i = 0; i < le_.size(); ++i) worst = std::max(worst, le_.activity(i, x) - le_.rhs(i));
  for (int i = 0; i < eq_.size(); ++i)
    worst = std::max(worst, std::abs(eq_.activity(i, x) - eq_.rhs(i)));
  return worst;
}

const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::solver_failure: return "solver_failure";
  }
  return "unknown";
}

double dual_objective(const LinearProgram& lp, const Solution& sol) {
  // Lagrangian with multipliers y >= 0 on le rows and free y on eq rows:
  //   cost·x + y·(Ax - b);  reduced cost d = cost + A^T y must be absorbed by bounds.
  const int n = lp.num_columns();
  std::vector<double> d = lp.cost();
  double value = lp.offset();
  auto accumulate = [&](const SparseRows& rows, const std::vector<double>& y) {
    for (int i = 0; i < rows.size(); ++i) {
      auto cols = rows.columns(i);
      auto vals = rows.values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) d[cols[k]] += y[i] * vals[k];
      value -= y[i] * rows.rhs(i);
    }
  };
  accumulate(lp.le(), sol.le_duals);
  accumulate(lp.eq(), sol.eq_duals);
  double scale = 1.0;
  for (double c : lp.cost()) scale = std::max(scale, std::abs(c));
  const double noise = 1e-9 * scale;
  for (int j = 0; j < n; ++j) {
    if (std::abs(d[j]) <= noise && !(std::isfinite(lp.lower()[j]) && std::isfinite(lp.upper()[j]))) continue;
    if (d[j] > 0.0) {
      value += std::isfinite(lp.lower()[j]) ? d[j] * lp.lower()[j] : -kInf;
    } else if (d[j] < 0.0) {
      value += std::isfinite(lp.upper()[j]) ? d[j] * lp.upper()[j] : -kInf;
    }
  }
  return value;
}

// --- variable index ---------------------------------------------------------

int VariableIndex::add(ColumnInfo info) {
  const int column = size();
  if (info.role == Role::investment) {
    if (info.step != -1) throw InvalidArgument("investment column carries a time step");
    auto pos = std::upper_bound(investment_order_.begin(), investment_order_.end(), info.element,
                                [&](const std::string& e, int c) { return e < columns_[c].element; });
    investment_order_.insert(pos, column);
  }
  columns_.push_back(std::move(info));
  return column;
}

int VariableIndex::investment_slot(const std::string& element) const {
  for (std::size_t s = 0; s < investment_order_.size(); ++s)
    if (columns_[investment_order_[s]].element == element) return static_cast<int>(s);
  return -1;
}

std::vector<double> project_investments(std::span<const double> x, const VariableIndex& index) {
  const auto& cols = index.investment_columns();
  std::vector<double> out;
  out.reserve(cols.size());
  for (int c : cols) out.push_back(x[c]);
  return out;
}

std::vector<double> embed_investments(std::span<const double> x_inv, const VariableIndex& index) {
  std::vector<double> x(index.size(), 0.0);
  const auto& cols = index.investment_columns();
  for (std::size_t s = 0; s < cols.size(); ++s) x[cols[s]] = x_inv[s];
  return x;
}

// --- reduction map ----------------------------------------------------------

ReductionMap::ReductionMap(std::vector<ReductionGroup> groups) : groups_(std::move(groups)) {
  if (groups_.empty()) throw InvalidArgument("reduction map needs at least one group");
  std::set<int> seen;
  for (const auto& g : groups_) {
    for (const auto& m : g.members) {
      if (!(m.weight > 0.0) || !std::isfinite(m.weight))
        throw InvalidArgument("reduction weight must be positive in group " + g.label);
      if (!seen.insert(m.slot).second)
        throw InvalidArgument("reduction groups overlap at investment slot " +
                              std::to_string(m.slot));
    }
  }
}

std::vector<std::string> ReductionMap::labels() const {
  std::vector<std::string> out;
  for (const auto& g : groups_) out.push_back(g.label);
  return out;
}

std::vector<double> aggregate(std::span<const double> x_inv, const ReductionMap& map) {
  std::vector<double> y(map.dimension(), 0.0);
  for (int i = 0; i < map.dimension(); ++i)
    for (const auto& m : map.groups()[i].members) y[i] += m.weight * x_inv[m.slot];
  return y;
}

LinearProgram apply_cost_slack(const LinearProgram& lp, double cost_bound) {
  if (!std::isfinite(cost_bound)) throw InvalidArgument("cost bound must be finite");
  LinearProgram out = lp;
  std::vector<Term> terms;
  for (int j = 0; j < lp.num_columns(); ++j)
    if (lp.cost()[j] != 0.0) terms.push_back({j, lp.cost()[j]});
  out.add_le(terms, cost_bound - lp.offset());
  return out;
}

LinearProgram set_reduced_objective(const LinearProgram& lp, const ReductionMap& map,
                                    std::span<const double> direction) {
  if (static_cast<int>(direction.size()) != map.dimension())
    throw InvalidArgument("direction dimension does not match reduction map");
  double norm = 0.0;
  for (double v : direction) norm += v * v;
  if (!(norm > 0.0)) throw InvalidArgument("zero direction");
  LinearProgram out = lp;
  for (int j = 0; j < out.num_columns(); ++j) out.set_cost(j, 0.0);
  out.set_offset(0.0);
  for (int i = 0; i < map.dimension(); ++i)
    for (const auto& m : map.groups()[i].members)
      out.set_cost(m.column, out.cost()[m.column] - direction[i] * m.weight);
  return out;
}

LinearProgram fix_reduced_point(const LinearProgram& lp, const ReductionMap& map,
                                std::span<const double> y, double tolerance) {
  if (static_cast<int>(y.size()) != map.dimension())
    throw InvalidArgument("point dimension does not match reduction map");
  LinearProgram out = lp;
  for (int i = 0; i < map.dimension(); ++i) {
    if (!std::isfinite(y[i])) throw InvalidArgument("reduced point must be finite");
    std::vector<Term> up;
    std::vector<Term> down;
    for (const auto& m : map.groups()[i].members) {
      up.push_back({m.column, m.weight});
      down.push_back({m.column, -m.weight});
    }
    out.add_le(up, y[i] + tolerance);
    out.add_le(down, -(y[i] - tolerance));
  }
  return out;
}

double default_fix_tolerance(std::span<const double> y, double relative) {
  double m = 0.0;
  for (double v : y) m = std::max(m, std::abs(v));
  return relative * std::max(m, 1.0);
}

// --- LP file export ---------------------------------------------------------

namespace {

std::string column_name(const LinearProgram& lp, int j) {
  if (j < static_cast<int>(lp.names().size()) && !lp.names()[j].empty()) {
    std::string s = lp.names()[j];
    for (char& ch : s)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.')) ch = '_';
    if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '.'))
      s = "x_" + s;
    return s + "#" + std::to_string(j);
  }
  return "x" + std::to_string(j);
}

void write_terms(std::ostream& out, const LinearProgram& lp, std::span<const int> cols,
                 std::span<const double> vals) {
  int on_line = 0;
  bool first = true;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const double v = vals[k];
    if (v == 0.0) continue;
    out << (v < 0 ? " - " : (first ? " " : " + ")) << std::abs(v) << ' '
        << column_name(lp, cols[k]);
    first = false;
    if (++on_line == 8) {
      out << "\n   ";
      on_line = 0;
    }
  }
  if (first) out << " 0 " << column_name(lp, 0);
}

}  // namespace

void write_lp_format(std::ostream& out, const LinearProgram& lp) {
  const auto precision = out.precision(17);
  out << "\\ generated by nearopt\nMinimize\n obj:";
  std::vector<int> cols;
  std::vector<double> vals;
  for (int j = 0; j < lp.num_columns(); ++j) {
    if (lp.cost()[j] != 0.0) {
      cols.push_back(j);
      vals.push_back(lp.cost()[j]);
    }
  }
  if (cols.empty()) {
    out << " 0 " << column_name(lp, 0);
  } else {
    write_terms(out, lp, cols, vals);
  }
  out << "\nSubject To\n";
  for (int i = 0; i < lp.num_le(); ++i) {
    out << " le" << i << ':';
    write_terms(out, lp, lp.le().columns(i), lp.le().values(i));
    out << " <= " << lp.le().rhs(i) << '\n';
  }
  for (int i = 0; i < lp.num_eq(); ++i) {
    out << " eq" << i << ':';
    write_terms(out, lp, lp.eq().columns(i), lp.eq().values(i));
    out << " = " << lp.eq().rhs(i) << '\n';
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.num_columns(); ++j) {
    const double lo = lp.lower()[j];
    const double hi = lp.upper()[j];
    const std::string name = column_name(lp, j);
    if (lo == hi) {
      out << ' ' << name << " = " << lo << '\n';
    } else if (!std::isfinite(lo) && !std::isfinite(hi)) {
      out << ' ' << name << " free\n";
    } else {
      out << ' ';
      if (std::isfinite(lo)) out << lo; else out << "-inf";
      out << " <= " << name << " <= ";
      if (std::isfinite(hi)) out << hi; else out << "+inf";
      out << '\n';
    }
  }
  out << "End\n";
  out.precision(precision);
}

}  // namespace nearopt::lp
