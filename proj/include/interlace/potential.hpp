#ifndef INTERLACE_POTENTIAL_HPP_
#define INTERLACE_POTENTIAL_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "interlace/errors.hpp"
#include "interlace/greens.hpp"
#include "interlace/lattice.hpp"
#include "interlace/rng.hpp"

namespace interlace {

inline constexpr std::size_t kMaxEquilibriumSize = 4096;

/// Escape probabilities e_K(x) = P_x(no return to K) on a finite K, and
/// cap(K) = sum_x e_K(x).
struct EquilibriumMeasure {
  PointSet set;
  std::vector<double> weights;
  double capacity = 0.0;
  /// max_x |(G e)(x) - 1| before clipping.
  double residual = 0.0;
  /// Number of round-off negatives set to zero.
  std::size_t clipped = 0;
};

/// G_xy = g(x - y) over the points of K.
inline Eigen::MatrixXd green_matrix(const PointSet &k, const GreenTable &table) {
  const auto n = static_cast<Eigen::Index>(k.size());
  Eigen::MatrixXd g(n, n);
  const double g0 = table.g0();
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = g0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = table(k[static_cast<std::size_t>(i)] -
                             k[static_cast<std::size_t>(j)]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

namespace detail {

inline void check_equilibrium_input(const PointSet &k, const GreenTable &table) {
  if (k.empty()) throw ConfigError("equilibrium: set is empty");
  if (k.size() > kMaxEquilibriumSize) {
    throw ConfigError("equilibrium: |K| = " + std::to_string(k.size()) +
                      " exceeds the dense-solver limit of " +
                      std::to_string(kMaxEquilibriumSize));
  }
  if (k.dim() != table.dim())
    throw ConfigError("equilibrium: set and Green table dimensions differ");
}

inline std::string condition_report(const Eigen::MatrixXd &g) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const auto &ev = es.eigenvalues();
  return "eigenvalue range [" + std::to_string(ev.minCoeff()) + ", " +
         std::to_string(ev.maxCoeff()) + "]";
}

}  // namespace detail

/// Solves the last-exit system G e = 1 (P_x(H_K < inf) = 1 on K).
inline EquilibriumMeasure equilibrium(const PointSet &k, const GreenTable &table) {
  detail::check_equilibrium_input(k, table);
  const Eigen::MatrixXd g = green_matrix(k, table);
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("equilibrium: Green matrix not positive definite, " +
                         detail::condition_report(g));
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.rows());
  const Eigen::VectorXd e = llt.solve(ones);

  EquilibriumMeasure out;
  out.set = k;
  out.residual = (g * e - ones).lpNorm<Eigen::Infinity>();
  if (!(out.residual <= 1e-8)) {
    throw NumericalError("equilibrium: residual " +
                         std::to_string(out.residual) + " exceeds 1e-8, " +
                         detail::condition_report(g));
  }
  constexpr double kClip = 1e-10;
  out.weights.resize(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    double w = e(static_cast<Eigen::Index>(i));
    if (w < 0.0) {
      if (w < -kClip) {
        throw NumericalError("equilibrium: weight " + std::to_string(w) +
                             " at " + k[i].to_string() +
                             " is negative beyond round-off");
      }
      w = 0.0;
      ++out.clipped;
    } else if (w > 1.0) {
      if (w > 1.0 + kClip)
        throw NumericalError("equilibrium: weight above 1 at " +
                             k[i].to_string());
      w = 1.0;
      ++out.clipped;
    }
    out.weights[i] = w;
  }
  if (out.clipped > 0) {
    std::clog << "equilibrium: clipped " << out.clipped
              << " round-off weight(s) to [0, 1]\n";
  }
  double cap = 0.0;
  for (double w : out.weights) cap += w;
  out.capacity = cap;
  return out;
}

inline double capacity(const PointSet &k, const GreenTable &table) {
  return equilibrium(k, table).capacity;
}

/// P_x(H_K < inf) = sum_y g(x - y) e_K(y), clamped to [0, 1].
inline double hitting_prob(const LatticePoint &x, const EquilibriumMeasure &eq,
                           const GreenTable &table) {
  if (eq.set.contains(x)) return 1.0;
  double h = 0.0;
  for (std::size_t i = 0; i < eq.set.size(); ++i) {
    if (eq.weights[i] == 0.0) continue;
    h += table(x - eq.set[i]) * eq.weights[i];
  }
  return std::clamp(h, 0.0, 1.0);
}

/// Monte Carlo estimate of e_K(x) = P_x(no return to K). Each walk from x
/// runs until it re-enters K (scores 0) or leaves the ball of the given
/// radius around x at z, where it scores the exact 1 - P_z(H_K < inf).
inline McEstimate escape_mc(const LatticePoint &x, const EquilibriumMeasure &eq,
                            std::uint64_t n_walks, double radius,
                            RngStream &rng, const GreenTable &table) {
  const PointSet &k = eq.set;
  if (!k.contains(x)) throw ConfigError("escape_mc: start point not in K");
  if (n_walks < 2) throw ConfigError("escape_mc: need at least 2 walks");
  const double need = set_metrics(k).diameter + 10.0;
  if (radius < need) {
    throw ConfigError("escape_mc: radius must be >= diameter(K) + 10 = " +
                      std::to_string(need));
  }
  const double r2 = radius * radius;
  const auto two_d = 2 * static_cast<std::uint64_t>(x.dim());
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t w = 0; w < n_walks; ++w) {
    LatticePoint p = x;
    double score = 0.0;
    while (true) {
      step_to_neighbor(p, static_cast<unsigned>(rng.below(two_d)));
      if (k.contains(p)) break;
      if ((p - x).norm2() > r2) {
        score = 1.0 - hitting_prob(p, eq, table);
        break;
      }
    }
    sum += score;
    sum2 += score * score;
  }
  const double nw = static_cast<double>(n_walks);
  McEstimate out;
  out.estimate = sum / nw;
  out.stderr_ = std::sqrt(
      std::max(0.0, (sum2 - nw * out.estimate * out.estimate) / (nw - 1.0)) /
      nw);
  out.samples = n_walks;
  return out;
}

/// u -> P(K vacant at level u) = exp(-u cap(K)).
struct VacancyLaw {
  PointSet set;
  double capacity = 0.0;
  double g0 = 0.0;

  static VacancyLaw of(const EquilibriumMeasure &eq, const GreenTable &table) {
    return {eq.set, eq.capacity, table.g0()};
  }
};

inline double vacancy_prob(const VacancyLaw &law, double u) {
  if (u < 0.0) throw ConfigError("vacancy_prob: level must be >= 0");
  return std::exp(-u * law.capacity);
}

/// cap({x, y}) = 2 / (g(0) + g(x - y)) for x != y.
inline double pair_capacity(const LatticePoint &x, const LatticePoint &y,
                            const GreenTable &table) {
  return 2.0 / (table.g0() + table(x - y));
}

/// Cov(1{x in I^u}, 1{y in I^u}) from the one- and two-point vacancy laws.
inline double pair_covariance(const LatticePoint &x, const LatticePoint &y,
                              double u, const GreenTable &table) {
  if (x == y) throw ConfigError("pair_covariance: points must differ");
  if (u < 0.0) throw ConfigError("pair_covariance: level must be >= 0");
  const double g0 = table.g0();
  return std::exp(-u * pair_capacity(x, y, table)) - std::exp(-2.0 * u / g0);
}

struct CoverConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  /// True when the (1/14)(d-2)/(d-1) branch is the minimum.
  bool geometric_branch = false;
};

/// c2 = P_0(no return to 0) = 1/g(0);
/// c1 = (1/4) min((1/14)(d-2)/(d-1), c2/(9-c2)).
inline CoverConstants constants_c1_c2(int d, const GreenTable &table) {
  check_dim(d);
  if (table.dim() != d) throw ConfigError("constants: table dimension mismatch");
  CoverConstants c;
  c.c2 = 1.0 / table.g0();
  const double geo = (1.0 / 14.0) * (d - 2.0) / (d - 1.0);
  const double esc = c.c2 / (9.0 - c.c2);
  c.geometric_branch = geo <= esc;
  c.c1 = 0.25 * std::min(geo, esc);
  return c;
}

}  // namespace interlace

#endif  // INTERLACE_POTENTIAL_HPP_
