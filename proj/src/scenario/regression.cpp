#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

#include "nearopt/errors.hpp"
#include "nearopt/scenario.hpp"

namespace nearopt::scenario {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LeastSquares {
  VectorXd beta;
  VectorXd se;  // standard errors
  int dof = 0;
  double rss = 0.0;
};

LeastSquares least_squares(const MatrixXd& x, const VectorXd& y) {
  const int n = static_cast<int>(x.rows());
  const int p = static_cast<int>(x.cols());
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
  if (qr.rank() < p) throw DegenerateFit("regression design matrix is rank deficient");
  LeastSquares out;
  out.beta = qr.solve(y);
  out.dof = n - p;
  const VectorXd resid = y - x * out.beta;
  out.rss = resid.squaredNorm();
  const double sigma2 = out.dof > 0 ? out.rss / out.dof : 0.0;
  const MatrixXd cov = (x.transpose() * x).inverse() * sigma2;
  out.se = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

// Two-sided p-value of H0: coefficient = 0. Exact fits count as significant
// unless the coefficient itself vanishes.
double p_value(double coef, double se, int dof, double scale) {
  if (dof <= 0 || se <= 1e-12 * std::max(1.0, scale)) return std::abs(coef) > 1e-12 * std::max(1.0, scale) ? 0.0 : 1.0;
  const boost::math::students_t dist(dof);
  const double t = std::abs(coef / se);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, t));
}

void check_calendar(const Calendar& c, int days) {
  if (c.days() < days) throw InvalidArgument("calendar shorter than the data");
  for (int d = 0; d < days; ++d)
    if (c.weekday[d] < 0 || c.weekday[d] > 6) throw InvalidArgument("weekday label outside 0..6");
}

}  // namespace

DegreeDays degree_days(double t) {
  return {std::max(kDegreeDayBase - t, 0.0), std::max(t - kDegreeDayBase, 0.0)};
}

int Calendar::label(int day) const {
  if (!holiday.empty() && holiday.at(day)) return 6;
  return weekday.at(day);
}

Calendar Calendar::consecutive(int days, int first_weekday) {
  Calendar c;
  for (int d = 0; d < days; ++d) c.weekday.push_back((first_weekday + d) % 7);
  return c;
}

WeeklyProfile fit_normalised_weekly_profile(const Series& y, const Calendar& calendar,
                                            const SignificanceOptions& options) {
  const int n = static_cast<int>(y.size());
  if (n % 24 != 0 || n < 14 * 24) throw InvalidArgument("weekly profile fit needs at least two full weeks of hours");
  const int days = n / 24;
  check_calendar(calendar, days);

  std::vector<int> slot(n);
  std::vector<int> count(168, 0);
  for (int t = 0; t < n; ++t) {
    slot[t] = 24 * calendar.label(t / 24) + t % 24;
    ++count[slot[t]];
  }
  // Hour-of-week levels that never occur (e.g. a weekday lost to holidays)
  // cannot be estimated.
  std::vector<int> column(168, -1);
  int p = 0;
  for (int h = 0; h < 168; ++h)
    if (count[h] > 0) column[h] = p++;
  if (p < 168) throw DegenerateFit("some hour-of-week levels have no observations");

  VectorXd rhs = Eigen::Map<const VectorXd>(y.data(), n);
  MatrixXd x = MatrixXd::Zero(n, 169);
  for (int t = 0; t < n; ++t) {
    x(t, 0) = t;
    x(t, 1 + column[slot[t]]) = 1.0;
  }
  WeeklyProfile out;
  out.profile.assign(168, 0.0);
  const LeastSquares full = least_squares(x, rhs);
  out.trend_p_value = p_value(full.beta[0], full.se[0], full.dof, 1.0 / n);
  if (out.trend_p_value <= options.level) {
    out.trend = full.beta[0];
    for (int h = 0; h < 168; ++h) out.profile[h] = full.beta[1 + column[h]];
  } else {
    // Without the trend the least-squares levels are per-slot means.
    for (int t = 0; t < n; ++t) out.profile[slot[t]] += y[t];
    for (int h = 0; h < 168; ++h) out.profile[h] /= count[h];
  }
  double mean = 0.0;
  for (double v : out.profile) mean += v;
  mean /= 168.0;
  if (!(mean > 0.0)) throw DegenerateFit("weekly profile has nonpositive mean");
  for (double& v : out.profile) v /= mean;
  out.trend /= mean;
  return out;
}

WeeklyProfile fit_weekly_profile(const Series& hourly_load, const Calendar& calendar,
                                 const SignificanceOptions& options) {
  const int n = static_cast<int>(hourly_load.size());
  if (n % 24 != 0 || n < 14 * 24) throw InvalidArgument("weekly profile fit needs at least two full weeks of hours");
  Series norm(n);
  for (int d = 0; d < n / 24; ++d) {
    double mean = 0.0;
    for (int h = 0; h < 24; ++h) mean += hourly_load[24 * d + h];
    mean /= 24.0;
    if (!(mean > 0.0) || !std::isfinite(mean))
      throw DegenerateFit("daily mean load is not positive on day " + std::to_string(d));
    for (int h = 0; h < 24; ++h) norm[24 * d + h] = hourly_load[24 * d + h] / mean;
  }
  return fit_normalised_weekly_profile(norm, calendar, options);
}

DailyRegression fit_daily_regression(const Series& daily_load, const Series& daily_temp,
                                     const Calendar& calendar, const SignificanceOptions& options) {
  const int n = static_cast<int>(daily_load.size());
  if (static_cast<int>(daily_temp.size()) != n) throw InvalidArgument("load and temperature lengths differ");
  if (n < 8) throw DegenerateFit("daily regression needs at least 8 observations");
  check_calendar(calendar, n);

  // Columns 0..6 weekday dummies, 7 cooling, 8 heating.
  MatrixXd all = MatrixXd::Zero(n, 9);
  for (int d = 0; d < n; ++d) {
    all(d, calendar.label(d)) = 1.0;
    const DegreeDays dd = degree_days(daily_temp[d]);
    all(d, 7) = dd.cdd;
    all(d, 8) = dd.hdd;
  }
  const VectorXd y = Eigen::Map<const VectorXd>(daily_load.data(), n);
  std::vector<bool> active(9);
  for (int c = 0; c < 9; ++c) active[c] = all.col(c).cwiseAbs().maxCoeff() > 0.0;
  for (int c = 0; c < 7; ++c)
    if (!active[c]) throw DegenerateFit("weekday " + std::to_string(c) + " has no observations");

  const double scale = y.cwiseAbs().maxCoeff();
  DailyRegression out;
  out.weekday.assign(7, 0.0);
  for (;;) {
    std::vector<int> cols;
    for (int c = 0; c < 9; ++c)
      if (active[c]) cols.push_back(c);
    MatrixXd x(n, cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) x.col(i) = all.col(cols[i]);
    const LeastSquares fit = least_squares(x, y);

    // Drop the weakest offending temperature driver and refit.
    int drop = -1;
    double worst = -1.0;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] < 7) continue;
      const double p = p_value(fit.beta[i], fit.se[i], fit.dof, scale);
      const double badness = fit.beta[i] < 0.0 ? 2.0 : (p > options.level ? p : -1.0);
      if (badness > worst && badness >= 0.0) {
        worst = badness;
        drop = cols[i];
      }
    }
    if (drop >= 0) {
      active[drop] = false;
      continue;
    }
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] < 7) out.weekday[cols[i]] = fit.beta[i];
      else if (cols[i] == 7) out.cooling = fit.beta[i];
      else out.heating = fit.beta[i];
    }
    return out;
  }
}

SynthesizedLoad synthesize_load(const LoadRegressionParams& params, const Series& daily_temp,
                                const Calendar& calendar, double scale) {
  const auto& w = params.weekly;
  const auto& d = params.daily;
  if (w.profile.size() != 168 || d.weekday.size() != 7) throw InvalidArgument("load parameters have wrong shape");
  for (double v : w.profile)
    if (!std::isfinite(v)) throw InvalidArgument("non-finite weekly profile");
  const int days = static_cast<int>(daily_temp.size());
  check_calendar(calendar, days);
  SynthesizedLoad out;
  out.load.resize(24 * days);
  for (int t = 0; t < 24 * days; ++t) {
    const int day = t / 24;
    const int label = calendar.label(day);
    const DegreeDays dd = degree_days(daily_temp[day]);
    const double bracket = w.trend * (t % 8760) + d.weekday[label] + d.cooling * dd.cdd + d.heating * dd.hdd;
    double v = w.profile[24 * label + t % 24] * bracket * scale;
    if (v < 0.0) {
      v = 0.0;
      ++out.clamped;
    }
    out.load[t] = v;
  }
  return out;
}

double normalize_hydro(double generation, double capacity_that_year, double reference_capacity) {
  if (!(capacity_that_year > 0.0)) throw InvalidArgument("hydro capacity must be positive");
  return generation * reference_capacity / capacity_that_year;
}

Series average_to_steps(const Series& hourly, double step_hours) {
  const int h = static_cast<int>(std::lround(step_hours));
  if (h < 1 || std::abs(step_hours - h) > 1e-12) throw InvalidArgument("step length must be a whole number of hours");
  if (hourly.size() % h != 0) throw InvalidArgument("hourly series does not divide into steps");
  Series out(hourly.size() / h, 0.0);
  for (std::size_t t = 0; t < hourly.size(); ++t) out[t / h] += hourly[t] / h;
  return out;
}

LoadRegressionParams default_load_model(double mean_load) {
  LoadRegressionParams p;
  p.weekly.profile.resize(168);
  for (int day = 0; day < 7; ++day) {
    const bool weekend = day >= 5;
    double sum = 0.0;
    for (int h = 0; h < 24; ++h) {
      const double morning = std::exp(-0.5 * std::pow((h - (weekend ? 10.0 : 8.0)) / 2.5, 2));
      const double evening = std::exp(-0.5 * std::pow((h - 19.0) / 2.5, 2));
      const double v = 0.75 + 0.25 * morning + 0.35 * evening;
      p.weekly.profile[24 * day + h] = v;
      sum += v;
    }
    for (int h = 0; h < 24; ++h) p.weekly.profile[24 * day + h] *= 24.0 / sum;
  }
  const double weekday_level[7] = {1.0, 1.02, 1.02, 1.01, 0.98, 0.86, 0.8};
  p.daily.weekday.resize(7);
  for (int d = 0; d < 7; ++d) p.daily.weekday[d] = 0.8 * mean_load * weekday_level[d];
  p.daily.heating = 0.025 * mean_load;
  p.daily.cooling = 0.01 * mean_load;
  return p;
}

}  // namespace nearopt::scenario
