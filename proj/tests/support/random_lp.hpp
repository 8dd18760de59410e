#pragma once

#include <random>

#include "nearopt/lp.hpp"

namespace nearopt::testing {

// Random LP with a known feasible point; a mix of boxed, one-sided and free
// columns, le and eq rows. Some instances are unbounded, some infeasible when
// `allow_infeasible` flips a row.
inline lp::LinearProgram random_lp(std::uint64_t seed, int n, int m, bool allow_infeasible = false) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  lp::LinearProgram out;
  std::vector<double> x0(n);
  for (int j = 0; j < n; ++j) {
    const double r = pos(rng);
    double lo = -lp::kInf;
    double hi = lp::kInf;
    if (r < 0.5) {
      lo = -2.0 * pos(rng);
      hi = lo + 0.5 + 3.0 * pos(rng);
    } else if (r < 0.75) {
      lo = 0.0;
    } else if (r < 0.9) {
      hi = 1.0 + pos(rng);
    }
    const double base = std::isfinite(lo) ? lo : (std::isfinite(hi) ? hi - 1.0 : 0.0);
    double span = (std::isfinite(lo) && std::isfinite(hi)) ? hi - lo : 1.0;
    x0[j] = base + span * pos(rng);
    if (!std::isfinite(lo) && std::isfinite(hi)) x0[j] = hi - pos(rng);
    out.add_column(unit(rng), lo, hi);
  }
  for (int i = 0; i < m; ++i) {
    std::vector<lp::Term> terms;
    for (int j = 0; j < n; ++j)
      if (pos(rng) < 0.4) terms.push_back({j, std::round(unit(rng) * 100.0) / 20.0});
    if (terms.empty()) terms.push_back({static_cast<int>(rng() % n), 1.0});
    double act = 0.0;
    for (const auto& t : terms) act += t.value * x0[t.column];
    if (pos(rng) < 0.2) {
      out.add_eq(terms, act);
    } else {
      double rhs = act + pos(rng);
      if (allow_infeasible && i == 0) {
        // Pair the row with its negation shifted past it.
        out.add_le(terms, rhs);
        std::vector<lp::Term> neg = terms;
        for (auto& t : neg) t.value = -t.value;
        out.add_le(neg, -rhs - 1.0);
        continue;
      }
      out.add_le(terms, rhs);
    }
  }
  return out;
}

}  // namespace nearopt::testing
