#pragma once

// Shared preprocessing for the two solver back-ends: stacks le and eq rows
// into one sparse matrix and applies Ruiz equilibration.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "nearopt/lp.hpp"

namespace nearopt::lp::detail {

struct CompiledLp {
  int n = 0;
  int m_le = 0;
  int m_eq = 0;
  Eigen::SparseMatrix<double> A;  // (m_le + m_eq) x n, scaled
  Eigen::VectorXd b;              // scaled
  Eigen::VectorXd c;              // scaled
  Eigen::VectorXd lower;          // scaled
  Eigen::VectorXd upper;          // scaled
  Eigen::VectorXd row_scale;      // A_scaled = R A S
  Eigen::VectorXd col_scale;
  double cost_scale = 1.0;        // c_scaled = S c / cost_scale
  double offset = 0.0;

  int m() const { return m_le + m_eq; }
};

CompiledLp compile(const LinearProgram& lp, bool equilibrate = true);

// Maps a scaled primal/dual result back to the caller's units and fills
// objective, duals and reduced costs. `y_scaled` follows the convention
// c + A^T y = d of Solution.
void unscale_into(const CompiledLp& cl, const LinearProgram& lp, const Eigen::VectorXd& x_scaled,
                  const Eigen::VectorXd& y_scaled, Solution& out);

}  // namespace nearopt::lp::detail
