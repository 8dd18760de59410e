// Dense bounded revised simplex with an explicit basis inverse.
//
// Column layout: [structural 0..n) [le slacks n..n+m_le) [artificials n+m_le..n+m_le+m).
// Phase 1 minimises the sum of artificials; phase 2 fixes them at zero.
// Pricing is Dantzig with a switch to Bland's rule after a run of degenerate
// pivots; the ratio test is Harris' two-pass variant.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "compiled.hpp"
#include "nearopt/errors.hpp"

namespace nearopt::lp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Place { basic, at_lower, at_upper, free_zero };

class DenseSimplex {
public:
  DenseSimplex(const detail::CompiledLp& cl, const SolverOptions& opt)
      : cl_(cl), opt_(opt), n_(cl.n), m_(cl.m()), m_le_(cl.m_le) {
    dense_ = MatrixXd(cl.A);
    total_ = n_ + m_le_ + m_;
    lower_.resize(total_);
    upper_.resize(total_);
    cost_.setZero(total_);
    for (int j = 0; j < n_; ++j) {
      lower_[j] = cl.lower[j];
      upper_[j] = cl.upper[j];
    }
    for (int i = 0; i < m_le_; ++i) {
      lower_[n_ + i] = 0.0;
      upper_[n_ + i] = kInf;
    }
    for (int i = 0; i < m_; ++i) {
      lower_[n_ + m_le_ + i] = 0.0;
      upper_[n_ + m_le_ + i] = kInf;
    }
    art_sign_.assign(m_, 1.0);
    max_iter_ = opt.max_iterations > 0 ? opt.max_iterations : 50 * (m_ + n_) + 5000;
  }

  Solution run(const LinearProgram& lp) {
    Solution out;
    out.method = "simplex";
    initial_basis();

    // Phase 1.
    bool need_phase1 = false;
    for (int i = 0; i < m_; ++i)
      if (is_artificial(basis_[i]) && x_[basis_[i]] > 0.0) need_phase1 = true;
    if (need_phase1) {
      cost_.setZero();
      for (int i = 0; i < m_; ++i) cost_[n_ + m_le_ + i] = 1.0;
      const Status s = iterate();
      if (s == Status::solver_failure) return failure(out, "phase 1 did not converge");
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) infeas += x_[n_ + m_le_ + i];
      const double scale = 1.0 + cl_.b.cwiseAbs().maxCoeff();
      if (infeas > opt_.feasibility_tol * scale) {
        out.status = Status::infeasible;
        out.iterations = iterations_;
        out.message = "phase 1 optimum has positive infeasibility";
        return out;
      }
    }
    // Freeze artificials at zero.
    for (int i = 0; i < m_; ++i) {
      const int a = n_ + m_le_ + i;
      upper_[a] = 0.0;
      if (place_[a] != Place::basic) {
        place_[a] = Place::at_lower;
        x_[a] = 0.0;
      }
    }
    cost_.setZero();
    for (int j = 0; j < n_; ++j) cost_[j] = cl_.c[j];
    const Status s = iterate();
    out.iterations = iterations_;
    if (s == Status::unbounded) {
      out.status = Status::unbounded;
      return out;
    }
    if (s != Status::optimal) return failure(out, "phase 2 did not converge");

    refactor();
    VectorXd xs(n_);
    for (int j = 0; j < n_; ++j) xs[j] = x_[j];
    const VectorXd y = -duals();  // c - A^T pi = d  ->  y = -pi
    detail::unscale_into(cl_, lp, xs, y, out);
    out.status = Status::optimal;
    return out;
  }

private:
  bool is_artificial(int j) const { return j >= n_ + m_le_; }

  // Column j of the full constraint matrix, applied lazily.
  void column(int j, VectorXd& out) const {
    if (j < n_) {
      out = dense_.col(j);
    } else if (j < n_ + m_le_) {
      out.setZero(m_);
      out[j - n_] = 1.0;
    } else {
      out.setZero(m_);
      const int i = j - n_ - m_le_;
      out[i] = art_sign_[i];
    }
  }

  void initial_basis() {
    x_.setZero(total_);
    place_.assign(total_, Place::at_lower);
    for (int j = 0; j < n_; ++j) {
      if (std::isfinite(lower_[j])) {
        place_[j] = Place::at_lower;
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        place_[j] = Place::at_upper;
        x_[j] = upper_[j];
      } else {
        place_[j] = Place::free_zero;
        x_[j] = 0.0;
      }
    }
    VectorXd xn = x_.head(n_);
    VectorXd r = cl_.b - dense_ * xn;
    basis_.assign(m_, -1);
    for (int i = 0; i < m_; ++i) {
      if (i < m_le_ && r[i] >= 0.0) {
        basis_[i] = n_ + i;
        x_[n_ + i] = r[i];
      } else {
        const int a = n_ + m_le_ + i;
        art_sign_[i] = r[i] >= 0.0 ? 1.0 : -1.0;
        basis_[i] = a;
        x_[a] = std::abs(r[i]);
      }
      place_[basis_[i]] = Place::basic;
    }
    refactor();
  }

  void refactor() {
    MatrixXd B(m_, m_);
    VectorXd col;
    for (int i = 0; i < m_; ++i) {
      column(basis_[i], col);
      B.col(i) = col;
    }
    if (m_ > 0) {
      Eigen::PartialPivLU<MatrixXd> lu(B);
      binv_ = lu.inverse();
    } else {
      binv_.resize(0, 0);
    }
    // Recompute basic values from the nonbasic ones.
    VectorXd rhs = cl_.b;
    for (int j = 0; j < total_; ++j) {
      if (place_[j] == Place::basic || x_[j] == 0.0) continue;
      column(j, col);
      rhs -= x_[j] * col;
    }
    VectorXd xb = binv_ * rhs;
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    since_refactor_ = 0;
  }

  VectorXd duals() const {
    VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    return binv_.transpose() * cb;
  }

  double objective() const { return cost_.dot(x_); }

  Status iterate() {
    const double dtol = opt_.optimality_tol * 1e-2;
    const double ptol = opt_.feasibility_tol * 1e-2;
    const double pivot_tol = 1e-9;
    bool bland = false;
    int stall = 0;
    double last_obj = objective();
    VectorXd col;
    VectorXd alpha;
    VectorXd d_struct;

    while (true) {
      if (iterations_ >= max_iter_) return Status::solver_failure;
      if (since_refactor_ >= 64) refactor();

      const VectorXd pi = duals();
      // Reduced costs.
      d_struct = cost_.head(n_) - dense_.transpose() * pi;
      int enter = -1;
      double best = 0.0;
      double dir = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (place_[j] == Place::basic) continue;
        if (lower_[j] == upper_[j]) continue;
        double d;
        if (j < n_) {
          d = d_struct[j];
        } else if (j < n_ + m_le_) {
          d = cost_[j] - pi[j - n_];
        } else {
          const int i = j - n_ - m_le_;
          d = cost_[j] - art_sign_[i] * pi[i];
        }
        double want = 0.0;
        if (place_[j] == Place::at_lower && d < -dtol) want = 1.0;
        else if (place_[j] == Place::at_upper && d > dtol) want = -1.0;
        else if (place_[j] == Place::free_zero && std::abs(d) > dtol) want = d < 0 ? 1.0 : -1.0;
        if (want == 0.0) continue;
        if (bland) {
          enter = j;
          dir = want;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
          dir = want;
        }
      }
      if (enter < 0) return Status::optimal;

      column(enter, col);
      alpha = binv_ * col;

      // Harris pass 1: relaxed step bound.
      double relaxed = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const int b = basis_[i];
        if (a > pivot_tol && std::isfinite(lower_[b])) {
          relaxed = std::min(relaxed, (x_[b] - lower_[b] + ptol) / a);
        } else if (a < -pivot_tol && std::isfinite(upper_[b])) {
          relaxed = std::min(relaxed, (upper_[b] - x_[b] + ptol) / -a);
        }
      }
      // Pass 2: among rows within the relaxed bound, largest pivot.
      int leave = -1;
      double step = kInf;
      double best_pivot = 0.0;
      for (int i = 0; i < m_; ++i) {
        const double a = dir * alpha[i];
        const int b = basis_[i];
        double ratio;
        if (a > pivot_tol && std::isfinite(lower_[b])) {
          ratio = (x_[b] - lower_[b]) / a;
        } else if (a < -pivot_tol && std::isfinite(upper_[b])) {
          ratio = (upper_[b] - x_[b]) / -a;
        } else {
          continue;
        }
        if (ratio > relaxed) continue;
        const bool better = bland ? (leave < 0 || basis_[i] < basis_[leave])
                                  : std::abs(alpha[i]) > best_pivot;
        if (better) {
          leave = i;
          best_pivot = std::abs(alpha[i]);
          step = std::max(ratio, 0.0);
        }
      }
      const double flip = upper_[enter] - lower_[enter];
      if (std::isfinite(flip) && flip <= step) {
        // Bound flip: entering variable jumps to its other bound.
        const double t = flip;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * t * alpha[i];
        if (place_[enter] == Place::at_lower) {
          place_[enter] = Place::at_upper;
          x_[enter] = upper_[enter];
        } else {
          place_[enter] = Place::at_lower;
          x_[enter] = lower_[enter];
        }
      } else {
        if (leave < 0) return Status::unbounded;
        const double t = step;
        for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * t * alpha[i];
        x_[enter] += dir * t;
        const int out_var = basis_[leave];
        const double a = dir * alpha[leave];
        if (a > 0) {
          place_[out_var] = Place::at_lower;
          x_[out_var] = lower_[out_var];
        } else {
          place_[out_var] = Place::at_upper;
          x_[out_var] = upper_[out_var];
        }
        if (!std::isfinite(x_[out_var])) {
          place_[out_var] = Place::free_zero;
          x_[out_var] = 0.0;
        }
        basis_[leave] = enter;
        place_[enter] = Place::basic;
        // Eta update of the inverse.
        const double piv = alpha[leave];
        binv_.row(leave) /= piv;
        for (int i = 0; i < m_; ++i) {
          if (i == leave || alpha[i] == 0.0) continue;
          binv_.row(i) -= alpha[i] * binv_.row(leave);
        }
        ++since_refactor_;
      }
      ++iterations_;

      const double obj = objective();
      if (obj < last_obj - 1e-12 * (1.0 + std::abs(last_obj))) {
        last_obj = obj;
        stall = 0;
        bland = false;
      } else if (++stall > 40) {
        bland = true;
      }
    }
  }

  Solution& failure(Solution& out, const char* msg) {
    out.status = Status::solver_failure;
    out.iterations = iterations_;
    out.message = msg;
    return out;
  }

  const detail::CompiledLp& cl_;
  const SolverOptions& opt_;
  int n_;
  int m_;
  int m_le_;
  int total_ = 0;
  MatrixXd dense_;
  VectorXd lower_;
  VectorXd upper_;
  VectorXd cost_;
  VectorXd x_;
  std::vector<double> art_sign_;
  std::vector<Place> place_;
  std::vector<int> basis_;
  MatrixXd binv_;
  int iterations_ = 0;
  int since_refactor_ = 0;
  int max_iter_ = 0;
};

}  // namespace

Solution solve_simplex(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  const detail::CompiledLp cl = detail::compile(lp);
  DenseSimplex simplex(cl, options);
  return simplex.run(lp);
}

}  // namespace nearopt::lp
