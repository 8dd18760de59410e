#include "compiled.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace nearopt::lp::detail {

CompiledLp compile(const LinearProgram& lp, bool equilibrate) {
  CompiledLp cl;
  cl.n = lp.num_columns();
  cl.m_le = lp.num_le();
  cl.m_eq = lp.num_eq();
  const int m = cl.m();

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(lp.le().nonzeros() + lp.eq().nonzeros());
  cl.b.resize(m);
  for (int i = 0; i < cl.m_le; ++i) {
    auto cols = lp.le().columns(i);
    auto vals = lp.le().values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) trip.emplace_back(i, cols[k], vals[k]);
    cl.b[i] = lp.le().rhs(i);
  }
  for (int i = 0; i < cl.m_eq; ++i) {
    auto cols = lp.eq().columns(i);
    auto vals = lp.eq().values(i);
    for (std::size_t k = 0; k < cols.size(); ++k)
      trip.emplace_back(cl.m_le + i, cols[k], vals[k]);
    cl.b[cl.m_le + i] = lp.eq().rhs(i);
  }
  cl.A.resize(m, cl.n);
  cl.A.setFromTriplets(trip.begin(), trip.end());
  cl.A.makeCompressed();

  cl.c = Eigen::Map<const Eigen::VectorXd>(lp.cost().data(), cl.n);
  cl.lower = Eigen::Map<const Eigen::VectorXd>(lp.lower().data(), cl.n);
  cl.upper = Eigen::Map<const Eigen::VectorXd>(lp.upper().data(), cl.n);
  cl.offset = lp.offset();
  cl.row_scale = Eigen::VectorXd::Ones(m);
  cl.col_scale = Eigen::VectorXd::Ones(cl.n);

  if (equilibrate && cl.A.nonZeros() > 0) {
    for (int pass = 0; pass < 10; ++pass) {
      Eigen::VectorXd rmax = Eigen::VectorXd::Zero(m);
      Eigen::VectorXd cmax = Eigen::VectorXd::Zero(cl.n);
      for (int j = 0; j < cl.A.outerSize(); ++j) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(cl.A, j); it; ++it) {
          const double v = std::abs(it.value());
          rmax[it.row()] = std::max(rmax[it.row()], v);
          cmax[j] = std::max(cmax[j], v);
        }
      }
      double spread = 0.0;
      for (int i = 0; i < m; ++i) {
        if (rmax[i] > 0.0) spread = std::max(spread, std::abs(1.0 - rmax[i]));
        rmax[i] = rmax[i] > 0.0 ? 1.0 / std::sqrt(rmax[i]) : 1.0;
      }
      for (int j = 0; j < cl.n; ++j) {
        if (cmax[j] > 0.0) spread = std::max(spread, std::abs(1.0 - cmax[j]));
        cmax[j] = cmax[j] > 0.0 ? 1.0 / std::sqrt(cmax[j]) : 1.0;
      }
      cl.A = rmax.asDiagonal() * cl.A * cmax.asDiagonal();
      cl.row_scale.array() *= rmax.array();
      cl.col_scale.array() *= cmax.array();
      if (spread < 1e-3) break;
    }
    // Keep the scaling to exact powers of two so scaled data round-trips exactly.
    auto pow2 = [](double v) { return std::exp2(std::round(std::log2(v))); };
    for (int i = 0; i < m; ++i) cl.row_scale[i] = pow2(cl.row_scale[i]);
    for (int j = 0; j < cl.n; ++j) cl.col_scale[j] = pow2(cl.col_scale[j]);
    cl.A.resize(m, cl.n);
    cl.A.setFromTriplets(trip.begin(), trip.end());
    cl.A = cl.row_scale.asDiagonal() * cl.A * cl.col_scale.asDiagonal();
    cl.A.makeCompressed();
  }

  cl.b.array() *= cl.row_scale.array();
  cl.c.array() *= cl.col_scale.array();
  cl.cost_scale = cl.n > 0 ? std::max(1.0, cl.c.cwiseAbs().maxCoeff()) : 1.0;
  cl.cost_scale = std::exp2(std::round(std::log2(cl.cost_scale)));
  cl.c /= cl.cost_scale;
  for (int j = 0; j < cl.n; ++j) {
    cl.lower[j] /= cl.col_scale[j];
    cl.upper[j] /= cl.col_scale[j];
  }
  return cl;
}

void unscale_into(const CompiledLp& cl, const LinearProgram& lp, const Eigen::VectorXd& x_scaled,
                  const Eigen::VectorXd& y_scaled, Solution& out) {
  const int n = cl.n;
  out.x.assign(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double v = x_scaled[j] * cl.col_scale[j];
    v = std::clamp(v, lp.lower()[j], lp.upper()[j]);
    out.x[j] = v;
  }
  out.le_duals.assign(cl.m_le, 0.0);
  out.eq_duals.assign(cl.m_eq, 0.0);
  for (int i = 0; i < cl.m_le; ++i)
    out.le_duals[i] = std::max(0.0, y_scaled[i] * cl.row_scale[i] * cl.cost_scale);
  for (int i = 0; i < cl.m_eq; ++i)
    out.eq_duals[i] = y_scaled[cl.m_le + i] * cl.row_scale[cl.m_le + i] * cl.cost_scale;

  out.reduced_costs = lp.cost();
  auto add_rows = [&](const SparseRows& rows, const std::vector<double>& y) {
    for (int i = 0; i < rows.size(); ++i) {
      auto cols = rows.columns(i);
      auto vals = rows.values(i);
      for (std::size_t k = 0; k < cols.size(); ++k) out.reduced_costs[cols[k]] += y[i] * vals[k];
    }
  };
  add_rows(lp.le(), out.le_duals);
  add_rows(lp.eq(), out.eq_duals);
  out.objective = lp.objective(out.x);
}

}  // namespace nearopt::lp::detail
