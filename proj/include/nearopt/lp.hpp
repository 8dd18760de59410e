#pragma once

#include <initializer_list>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace nearopt::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
  int column;
  double value;
};

// Row-compressed block of constraint rows, appended one row at a time.
class SparseRows {
public:
  int size() const { return static_cast<int>(rhs_.size()); }
  int nonzeros() const { return static_cast<int>(index_.size()); }

  int append(std::span<const Term> terms, double rhs);

  std::span<const int> columns(int row) const {
    return {index_.data() + start_[row], static_cast<std::size_t>(start_[row + 1] - start_[row])};
  }
  std::span<const double> values(int row) const {
    return {value_.data() + start_[row], static_cast<std::size_t>(start_[row + 1] - start_[row])};
  }
  double rhs(int row) const { return rhs_[row]; }
  double activity(int row, std::span<const double> x) const;

  friend bool operator==(const SparseRows&, const SparseRows&) = default;

private:
  std::vector<int> start_{0};
  std::vector<int> index_;
  std::vector<double> value_;
  std::vector<double> rhs_;
};

// min cost·x + offset  s.t.  le rows: a·x <= rhs,  eq rows: a·x = rhs,
//                            lower <= x <= upper.
// Values are built once and then treated as immutable; every constraint
// surgery below returns a modified copy.
class LinearProgram {
public:
  int add_column(double cost, double lower, double upper, std::string name = {});
  int add_le(std::span<const Term> terms, double rhs) { return le_.append(terms, rhs); }
  int add_eq(std::span<const Term> terms, double rhs) { return eq_.append(terms, rhs); }
  int add_le(std::initializer_list<Term> terms, double rhs) {
    return add_le(std::span<const Term>(terms.begin(), terms.size()), rhs);
  }
  int add_eq(std::initializer_list<Term> terms, double rhs) {
    return add_eq(std::span<const Term>(terms.begin(), terms.size()), rhs);
  }

  void set_cost(int column, double cost) { cost_[column] = cost; }
  void set_bounds(int column, double lower, double upper);
  void set_offset(double offset) { offset_ = offset; }

  int num_columns() const { return static_cast<int>(cost_.size()); }
  int num_le() const { return le_.size(); }
  int num_eq() const { return eq_.size(); }

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<std::string>& names() const { return names_; }
  const SparseRows& le() const { return le_; }
  const SparseRows& eq() const { return eq_; }
  double offset() const { return offset_; }

  // Throws InvalidArgument on out-of-range indices, crossed bounds or NaN/Inf data.
  void validate() const;

  double objective(std::span<const double> x) const;
  // Largest absolute violation of rows and bounds.
  double max_violation(std::span<const double> x) const;

  friend bool operator==(const LinearProgram&, const LinearProgram&) = default;

private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<std::string> names_;
  SparseRows le_;
  SparseRows eq_;
  double offset_ = 0.0;
};

enum class Status { optimal, infeasible, unbounded, solver_failure };
const char* to_string(Status s);

struct Solution {
  Status status = Status::solver_failure;
  std::vector<double> x;
  double objective = 0.0;
  // Multipliers of the le rows, >= 0 at optimality (shadow price of relaxing rhs).
  std::vector<double> le_duals;
  // Multipliers of the eq rows, same sign convention: cost + A^T y = reduced costs.
  std::vector<double> eq_duals;
  std::vector<double> reduced_costs;
  int iterations = 0;
  std::string method;
  std::string message;

  bool optimal() const { return status == Status::optimal; }
};

enum class Method { automatic, simplex, interior_point };

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-7;
  Method method = Method::automatic;
  // automatic picks the dense simplex when rows and columns are both below these.
  int simplex_max_rows = 80;
  int simplex_max_columns = 200;
  int max_iterations = 0;  // 0 = solver default
};

Solution solve(const LinearProgram& lp, const SolverOptions& options = {});
Solution solve_simplex(const LinearProgram& lp, const SolverOptions& options = {});
Solution solve_interior_point(const LinearProgram& lp, const SolverOptions& options = {});

// Dual objective implied by the multipliers in `sol`; equals the primal
// objective at optimality (strong duality).
double dual_objective(const LinearProgram& lp, const Solution& sol);

// --- variable bookkeeping and reduction maps -------------------------------

enum class Role { investment, operational };

struct ColumnInfo {
  std::string element;
  Role role = Role::operational;
  std::string group;  // technology tag
  int step = -1;      // -1 for investment columns
};

class VariableIndex {
public:
  int add(ColumnInfo info);
  const ColumnInfo& at(int column) const { return columns_.at(column); }
  int size() const { return static_cast<int>(columns_.size()); }
  // Investment columns ordered by element id.
  const std::vector<int>& investment_columns() const { return investment_order_; }
  // Position of `element` in the investment vector, -1 when absent.
  int investment_slot(const std::string& element) const;

private:
  std::vector<ColumnInfo> columns_;
  std::vector<int> investment_order_;
};

std::vector<double> project_investments(std::span<const double> x, const VariableIndex& index);
// Inverse of project_investments with every operational entry set to zero.
std::vector<double> embed_investments(std::span<const double> x_inv, const VariableIndex& index);

struct ReductionMember {
  int slot;    // position in the investment vector
  int column;  // column in the linear program
  double weight;
};

struct ReductionGroup {
  std::string label;
  std::vector<ReductionMember> members;
};

// Weighted group sums of investment variables, R^{N_inv} -> R^k.
class ReductionMap {
public:
  ReductionMap() = default;
  explicit ReductionMap(std::vector<ReductionGroup> groups);
  int dimension() const { return static_cast<int>(groups_.size()); }
  const std::vector<ReductionGroup>& groups() const { return groups_; }
  std::vector<std::string> labels() const;

private:
  std::vector<ReductionGroup> groups_;
};

std::vector<double> aggregate(std::span<const double> x_inv, const ReductionMap& map);

LinearProgram apply_cost_slack(const LinearProgram& lp, double cost_bound);
LinearProgram set_reduced_objective(const LinearProgram& lp, const ReductionMap& map,
                                    std::span<const double> direction);
LinearProgram fix_reduced_point(const LinearProgram& lp, const ReductionMap& map,
                                std::span<const double> y, double tolerance);
// Band used by fix_reduced_point when the caller does not pick one.
double default_fix_tolerance(std::span<const double> y, double relative = 1e-4);

// CPLEX LP text format.
void write_lp_format(std::ostream& out, const LinearProgram& lp);

}  // namespace nearopt::lp
