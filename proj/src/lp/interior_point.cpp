// Homogeneous self-dual interior-point method with Mehrotra's
// predictor-corrector, solving the quasi-definite augmented system
//
//   [ -(D + rho)   A^T ] [dx]   [ . ]
//   [      A     delta ] [dy] = [ . ]
//
// with a sparse LDL^T factorisation. Upper bounds are handled implicitly
// (x + s = u tau) and free columns carry no barrier term.

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <vector>

#include "compiled.hpp"
#include "nearopt/errors.hpp"

namespace nearopt::lp {

namespace {

using Eigen::SparseMatrix;
using Eigen::VectorXd;

enum class Kind { nonneg, boxed, free };

// min c^T x s.t. A x = b, x_j >= 0 (nonneg/boxed), x_j <= u_j (boxed).
struct StandardForm {
  SparseMatrix<double> A;
  VectorXd b;
  VectorXd c;
  VectorXd u;  // meaningful for boxed columns only
  std::vector<Kind> kind;
  double b_scale = 1.0;

  // Recovery: original column j = shift[j] + sign[j] * x_std[col[j]] (col -1: fixed).
  std::vector<int> col;
  std::vector<double> shift;
  std::vector<double> sign;
};

StandardForm to_standard(const detail::CompiledLp& cl) {
  StandardForm sf;
  const int m = cl.m();
  sf.b = cl.b;
  sf.col.assign(cl.n, -1);
  sf.shift.assign(cl.n, 0.0);
  sf.sign.assign(cl.n, 1.0);
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> cost;
  std::vector<double> ub;
  const SparseMatrix<double>& A = cl.A;

  for (int j = 0; j < cl.n; ++j) {
    const double l = cl.lower[j];
    const double u = cl.upper[j];
    const bool lf = std::isfinite(l);
    const bool uf = std::isfinite(u);
    auto shift_rhs = [&](double value) {
      for (SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
        sf.b[it.row()] -= it.value() * value;
    };
    if (lf && uf && l == u) {
      shift_rhs(l);
      sf.shift[j] = l;
      continue;
    }
    const int k = static_cast<int>(cost.size());
    sf.col[j] = k;
    double s = 1.0;
    Kind kind = Kind::nonneg;
    double bound = kInf;
    if (lf) {
      shift_rhs(l);
      sf.shift[j] = l;
      if (uf) {
        kind = Kind::boxed;
        bound = u - l;
      }
    } else if (uf) {
      shift_rhs(u);
      sf.shift[j] = u;
      s = -1.0;
    } else {
      kind = Kind::free;
    }
    sf.sign[j] = s;
    for (SparseMatrix<double>::InnerIterator it(A, j); it; ++it)
      trip.emplace_back(it.row(), k, s * it.value());
    cost.push_back(s * cl.c[j]);
    ub.push_back(bound);
    sf.kind.push_back(kind);
  }
  for (int i = 0; i < cl.m_le; ++i) {
    const int k = static_cast<int>(cost.size());
    trip.emplace_back(i, k, 1.0);
    cost.push_back(0.0);
    ub.push_back(kInf);
    sf.kind.push_back(Kind::nonneg);
  }
  const int n = static_cast<int>(cost.size());
  sf.A.resize(m, n);
  sf.A.setFromTriplets(trip.begin(), trip.end());
  sf.A.makeCompressed();
  sf.c = Eigen::Map<VectorXd>(cost.data(), n);
  sf.u = Eigen::Map<VectorXd>(ub.data(), n);

  double scale = 1.0;
  if (m > 0) scale = std::max(scale, sf.b.cwiseAbs().maxCoeff());
  for (int k = 0; k < n; ++k)
    if (sf.kind[k] == Kind::boxed) scale = std::max(scale, sf.u[k]);
  sf.b_scale = std::exp2(std::round(std::log2(scale)));
  sf.b /= sf.b_scale;
  for (int k = 0; k < n; ++k)
    if (sf.kind[k] == Kind::boxed) sf.u[k] /= sf.b_scale;
  return sf;
}

double inf_norm(const VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

class HsdSolver {
public:
  HsdSolver(const StandardForm& sf, const SolverOptions& opt) : sf_(sf), opt_(opt) {
    n_ = static_cast<int>(sf.c.size());
    m_ = static_cast<int>(sf.b.size());
    barrier_ = VectorXd::Zero(n_);
    boxed_ = VectorXd::Zero(n_);
    for (int k = 0; k < n_; ++k) {
      barrier_[k] = sf.kind[k] != Kind::free ? 1.0 : 0.0;
      boxed_[k] = sf.kind[k] == Kind::boxed ? 1.0 : 0.0;
    }
    u_ = sf.u;
    for (int k = 0; k < n_; ++k)
      if (!boxed_[k]) u_[k] = 0.0;
    n_barrier_ = 0;
    for (int k = 0; k < n_; ++k) n_barrier_ += static_cast<int>(barrier_[k] + boxed_[k]);
    build_pattern();
  }

  Status run() {
    x_ = barrier_;
    z_ = barrier_;
    s_ = boxed_;
    w_ = boxed_;
    y_.setZero(m_);
    tau_ = 1.0;
    kappa_ = 1.0;
    const int max_iter = opt_.max_iterations > 0 ? opt_.max_iterations : 200;
    const double bnorm = 1.0 + std::max(inf_norm(sf_.b), inf_norm(u_));
    const double cnorm = 1.0 + inf_norm(sf_.c);
    int small_steps = 0;

    for (iter_ = 0; iter_ < max_iter; ++iter_) {
      const double merit = measure(bnorm, cnorm);
      if (merit <= tight_) return Status::optimal;
      remember_best(merit);
      if (tau_ < 1e-2 * kappa_) {
        const Status cert = certificate();
        if (cert != Status::optimal) return cert;
      }
      if (small_steps >= 6) break;

      if (!factor()) break;

      // Direction for the tau column, shared by predictor and corrector.
      VectorXd qx;
      VectorXd qy;
      {
        VectorXd rhs_x = sf_.c - boxed_w_u_over_s();
        solve_kkt(rhs_x, sf_.b, qx, qy);
      }

      // Predictor.
      Direction aff;
      {
        VectorXd rxz = -(x_.cwiseProduct(z_)).cwiseProduct(barrier_);
        VectorXd rsw = -(s_.cwiseProduct(w_)).cwiseProduct(boxed_);
        direction(1.0, rxz, rsw, -tau_ * kappa_, qx, qy, aff);
      }
      const double alpha_aff = std::min(1.0, max_step(aff));
      const double mu = complementarity() / (n_barrier_ + 1);
      const double mu_aff = complementarity_after(aff, alpha_aff) / (n_barrier_ + 1);
      double sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
      sigma = std::clamp(sigma, 1e-8, 1.0);

      // Corrector.
      Direction dir;
      {
        VectorXd rxz = (VectorXd::Constant(n_, sigma * mu) - x_.cwiseProduct(z_) -
                        aff.x.cwiseProduct(aff.z))
                           .cwiseProduct(barrier_);
        VectorXd rsw = (VectorXd::Constant(n_, sigma * mu) - s_.cwiseProduct(w_) -
                        aff.s.cwiseProduct(aff.w))
                           .cwiseProduct(boxed_);
        const double rtk = sigma * mu - tau_ * kappa_ - aff.tau * aff.kappa;
        direction(1.0 - sigma, rxz, rsw, rtk, qx, qy, dir);
      }
      double alpha = std::min(1.0, 0.995 * max_step(dir));
      if (alpha < 1e-8) ++small_steps; else small_steps = 0;

      x_ += alpha * dir.x;
      z_ += alpha * dir.z;
      s_ += alpha * dir.s;
      w_ += alpha * dir.w;
      y_ += alpha * dir.y;
      tau_ += alpha * dir.tau;
      kappa_ += alpha * dir.kappa;
      // Keep inactive slots exactly zero.
      z_ = z_.cwiseProduct(barrier_);
      s_ = s_.cwiseProduct(boxed_);
      w_ = w_.cwiseProduct(boxed_);
    }
    const Status cert = certificate();
    // Near the end the KKT solves can lose accuracy; fall back to the best iterate.
    restore_best(bnorm, cnorm);
    if (last_pres_ <= loose_ && last_dres_ <= loose_ && last_gap_ <= loose_) return Status::optimal;
    if (cert != Status::optimal) return cert;
    return Status::solver_failure;
  }

  VectorXd x() const { return x_ / tau_; }
  VectorXd y() const { return y_ / tau_; }
  int iterations() const { return iter_; }
  double last_pres() const { return last_pres_; }
  double last_dres() const { return last_dres_; }
  double last_gap() const { return last_gap_; }

private:
  struct Direction {
    VectorXd x, y, z, s, w;
    double tau = 0.0;
    double kappa = 0.0;
  };

  struct Iterate {
    VectorXd x, y, z, s, w;
    double tau = 1.0;
    double kappa = 1.0;
    double merit = kInf;
  };

  void remember_best(double merit) {
    if (merit >= best_.merit) return;
    best_ = {x_, y_, z_, s_, w_, tau_, kappa_, merit};
  }

  // Refreshes the residuals; returns the worst of the relative primal, dual
  // and gap measures.
  double measure(double bnorm, double cnorm) {
    residuals();
    last_pres_ = std::max(inf_norm(rp_), inf_norm(ru_)) / tau_ / bnorm;
    last_dres_ = inf_norm(rd_) / tau_ / cnorm;
    const double pobj = sf_.c.dot(x_) / tau_;
    const double dobj = (sf_.b.dot(y_) - u_.dot(w_)) / tau_;
    last_gap_ = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    return std::max({last_pres_, last_dres_, last_gap_});
  }

  void restore_best(double bnorm, double cnorm) {
    if (measure(bnorm, cnorm) <= best_.merit) return;
    x_ = best_.x;
    y_ = best_.y;
    z_ = best_.z;
    s_ = best_.s;
    w_ = best_.w;
    tau_ = best_.tau;
    kappa_ = best_.kappa;
    measure(bnorm, cnorm);
  }

  void build_pattern() {
    const int dim = n_ + m_;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(dim + sf_.A.nonZeros());
    for (int k = 0; k < n_; ++k) trip.emplace_back(k, k, -1.0);
    for (int k = 0; k < n_; ++k)
      for (SparseMatrix<double>::InnerIterator it(sf_.A, k); it; ++it)
        trip.emplace_back(n_ + it.row(), k, it.value());
    for (int i = 0; i < m_; ++i) trip.emplace_back(n_ + i, n_ + i, 1.0);
    K_.resize(dim, dim);
    K_.setFromTriplets(trip.begin(), trip.end());
    K_.makeCompressed();
    diag_pos_.resize(dim);
    for (int j = 0; j < dim; ++j) {
      // Lower-triangular column: diagonal is the first stored entry.
      const int p = K_.outerIndexPtr()[j];
      diag_pos_[j] = p;
    }
    ldlt_.analyzePattern(K_);
  }

  bool factor(double first_boost = 1.0) {
    theta_inv_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      double d = 0.0;
      if (barrier_[k] > 0.0) d += z_[k] / x_[k];
      if (boxed_[k] > 0.0) d += w_[k] / s_[k];
      theta_inv_[k] = std::min(d, 1e30);
    }
    double* val = K_.valuePtr();
    // Retry with heavier regularisation when a pivot collapses; refinement
    // against the unregularised system absorbs the perturbation.
    for (boost_ = first_boost; boost_ <= kMaxBoost; boost_ *= 100.0) {
      for (int k = 0; k < n_; ++k) val[diag_pos_[k]] = -(theta_inv_[k] + boost_ * rho_);
      for (int i = 0; i < m_; ++i) val[diag_pos_[n_ + i]] = boost_ * delta_;
      ldlt_.factorize(K_);
      if (ldlt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  // Solves the unregularised system by refinement. When refinement stalls on
  // an inaccurate factor, more heavily regularised factors are tried; one is
  // kept only if it meets the accuracy target.
  void solve_kkt(const VectorXd& fx, const VectorXd& fy, VectorXd& dx, VectorXd& dy) {
    VectorXd rhs(n_ + m_);
    rhs << fx, fy;
    const double accept = kAcceptKkt * (1.0 + inf_norm(rhs));
    double res = 0.0;
    VectorXd sol = refined_solve(fx, fy, rhs, res);
    if (res > accept) {
      const double base = boost_;
      bool improved = false;
      for (double b = base * 100.0; b <= kMaxBoost && !improved; b *= 100.0) {
        if (!factor(b)) break;
        double r = 0.0;
        VectorXd candidate = refined_solve(fx, fy, rhs, r);
        if (r <= accept) {
          sol = std::move(candidate);
          improved = true;
        }
      }
      if (!improved) factor(base);
    }
    dx = sol.head(n_);
    dy = sol.tail(m_);
  }

  VectorXd refined_solve(const VectorXd& fx, const VectorXd& fy, const VectorXd& rhs, double& res) {
    VectorXd sol = ldlt_.solve(rhs);
    VectorXd best = sol;
    res = kInf;
    for (int pass = 0; pass <= 3; ++pass) {
      const VectorXd r = kkt_residual(fx, fy, sol);
      const double norm = inf_norm(r);
      if (norm < res) {
        res = norm;
        best = sol;
      }
      if (norm <= 1e-14 * (1.0 + inf_norm(rhs)) || pass == 3) break;
      sol += ldlt_.solve(r);
    }
    return best;
  }

  VectorXd kkt_residual(const VectorXd& fx, const VectorXd& fy, const VectorXd& sol) const {
    const auto sx = sol.head(n_);
    const auto sy = sol.tail(m_);
    VectorXd r(n_ + m_);
    r.head(n_) = fx - (-theta_inv_.cwiseProduct(sx) + sf_.A.transpose() * sy);
    r.tail(m_) = fy - sf_.A * sx;
    return r;
  }

  VectorXd boxed_w_u_over_s() const {
    VectorXd v = VectorXd::Zero(n_);
    for (int k = 0; k < n_; ++k)
      if (boxed_[k] > 0.0) v[k] = w_[k] * u_[k] / s_[k];
    return v;
  }

  void residuals() {
    rp_ = sf_.b * tau_ - sf_.A * x_;
    ru_ = (u_ * tau_ - x_ - s_).cwiseProduct(boxed_);
    rd_ = sf_.c * tau_ - sf_.A.transpose() * y_ - z_ + w_;
    rg_ = sf_.c.dot(x_) - sf_.b.dot(y_) + u_.dot(w_) + kappa_;
  }

  double complementarity() const {
    return x_.cwiseProduct(z_).dot(barrier_) + s_.cwiseProduct(w_).dot(boxed_) + tau_ * kappa_;
  }

  double complementarity_after(const Direction& d, double a) const {
    const VectorXd xn = x_ + a * d.x;
    const VectorXd zn = z_ + a * d.z;
    const VectorXd sn = s_ + a * d.s;
    const VectorXd wn = w_ + a * d.w;
    return xn.cwiseProduct(zn).dot(barrier_) + sn.cwiseProduct(wn).dot(boxed_) +
           (tau_ + a * d.tau) * (kappa_ + a * d.kappa);
  }

  void direction(double eta, const VectorXd& rxz, const VectorXd& rsw, double rtk,
                 const VectorXd& qx, const VectorXd& qy, Direction& d) {
    VectorXd h = eta * rd_;
    for (int k = 0; k < n_; ++k) {
      if (barrier_[k] > 0.0) h[k] -= rxz[k] / x_[k];
      if (boxed_[k] > 0.0) h[k] += (rsw[k] - w_[k] * eta * ru_[k]) / s_[k];
    }
    VectorXd px;
    VectorXd py;
    solve_kkt(h, eta * rp_, px, py);

    // Gap row: -g^T dx + b^T dy + (sum u^2 w/s + kappa/tau) dtau = rhs.
    VectorXd g = sf_.c + boxed_w_u_over_s();
    double sum_u2ws = 0.0;
    double extra = 0.0;
    for (int k = 0; k < n_; ++k) {
      if (boxed_[k] <= 0.0) continue;
      sum_u2ws += u_[k] * u_[k] * w_[k] / s_[k];
      extra += u_[k] * rsw[k] / s_[k] - eta * u_[k] * w_[k] * ru_[k] / s_[k];
    }
    const double num = eta * rg_ + extra + rtk / tau_ + g.dot(px) - sf_.b.dot(py);
    const double den = -g.dot(qx) + sf_.b.dot(qy) + sum_u2ws + kappa_ / tau_;
    d.tau = num / den;
    d.x = px + d.tau * qx;
    d.y = py + d.tau * qy;
    d.z.setZero(n_);
    d.s.setZero(n_);
    d.w.setZero(n_);
    for (int k = 0; k < n_; ++k) {
      if (barrier_[k] > 0.0) d.z[k] = (rxz[k] - z_[k] * d.x[k]) / x_[k];
      if (boxed_[k] > 0.0) {
        d.s[k] = eta * ru_[k] + u_[k] * d.tau - d.x[k];
        d.w[k] = (rsw[k] - w_[k] * d.s[k]) / s_[k];
      }
    }
    d.kappa = (rtk - kappa_ * d.tau) / tau_;
  }

  double max_step(const Direction& d) const {
    double a = 1e30;
    auto limit = [&a](double v, double dv) {
      if (dv < 0.0) a = std::min(a, -v / dv);
    };
    for (int k = 0; k < n_; ++k) {
      if (barrier_[k] > 0.0) {
        limit(x_[k], d.x[k]);
        limit(z_[k], d.z[k]);
      }
      if (boxed_[k] > 0.0) {
        limit(s_[k], d.s[k]);
        limit(w_[k], d.w[k]);
      }
    }
    limit(tau_, d.tau);
    limit(kappa_, d.kappa);
    return a;
  }

  Status certificate() const {
    const double tol = 1e-8;
    // Primal infeasibility: dual ray with b^T y - u^T w > 0.
    const double dray = sf_.b.dot(y_) - u_.dot(w_);
    if (dray > 0.0) {
      const double viol = inf_norm(sf_.A.transpose() * y_ + z_ - w_);
      const double scale = std::max(1.0, inf_norm(y_));
      if (viol / dray <= tol * scale) return Status::infeasible;
    }
    // Dual infeasibility: primal ray with c^T x < 0.
    const double pray = -sf_.c.dot(x_);
    if (pray > 0.0) {
      const double r1 = inf_norm(sf_.A * x_);
      const double r2 = inf_norm(x_.cwiseProduct(boxed_));
      const double scale = std::max(1.0, inf_norm(x_));
      if (std::max(r1, r2) / pray <= tol * scale) return Status::unbounded;
    }
    return Status::optimal;  // no certificate
  }

  const StandardForm& sf_;
  const SolverOptions& opt_;
  int n_ = 0;
  int m_ = 0;
  int n_barrier_ = 0;
  VectorXd barrier_;
  VectorXd boxed_;
  VectorXd u_;
  VectorXd x_, z_, s_, w_, y_;
  double tau_ = 1.0;
  double kappa_ = 1.0;
  VectorXd rp_, ru_, rd_;
  double rg_ = 0.0;
  VectorXd theta_inv_;
  SparseMatrix<double> K_;
  std::vector<int> diag_pos_;
  Eigen::SimplicialLDLT<SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
  static constexpr double kMaxBoost = 1e6;
  static constexpr double kAcceptKkt = 1e-6;
  double boost_ = 1.0;
  double rho_ = 1e-9;
  double delta_ = 1e-9;
  double tight_ = 1e-9;
  double loose_ = 1e-7;
  int iter_ = 0;
  Iterate best_;
  double last_pres_ = 0.0;
  double last_dres_ = 0.0;
  double last_gap_ = 0.0;
};

}  // namespace

Solution solve_interior_point(const LinearProgram& lp, const SolverOptions& options) {
  lp.validate();
  const detail::CompiledLp cl = detail::compile(lp);
  const StandardForm sf = to_standard(cl);
  HsdSolver hsd(sf, options);
  const Status status = hsd.run();

  Solution out;
  out.method = "interior_point";
  out.iterations = hsd.iterations();
  out.status = status;
  if (status != Status::optimal) {
    out.message = "residuals: primal " + std::to_string(hsd.last_pres()) + ", dual " +
                  std::to_string(hsd.last_dres()) + ", gap " + std::to_string(hsd.last_gap());
    return out;
  }
  const VectorXd xs = hsd.x() * sf.b_scale;
  const VectorXd ys = hsd.y();
  VectorXd x_compiled(cl.n);
  for (int j = 0; j < cl.n; ++j)
    x_compiled[j] = sf.col[j] < 0 ? sf.shift[j] : sf.shift[j] + sf.sign[j] * xs[sf.col[j]];
  detail::unscale_into(cl, lp, x_compiled, -ys, out);
  return out;
}

}  // namespace nearopt::lp
