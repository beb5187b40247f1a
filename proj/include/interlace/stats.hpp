#ifndef INTERLACE_STATS_HPP_
#define INTERLACE_STATS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "interlace/errors.hpp"
#include "interlace/greens.hpp"
#include "interlace/index_set.hpp"
#include "interlace/interlacement.hpp"
#include "interlace/lattice.hpp"

namespace interlace {

inline double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

/// M / g(0) - log n.
inline double rescale_cover_level(double m, std::size_t n, double g0) {
  if (n < 1) throw ConfigError("rescale_cover_level: n must be >= 1");
  if (!(g0 > 0.0)) throw ConfigError("rescale_cover_level: g0 must be > 0");
  return m / g0 - std::log(static_cast<double>(n));
}

/// u_A(z) = g(0) (log|A| + z), the inverse of rescale_cover_level.
inline double cover_level_at(double z, std::size_t n, double g0) {
  return g0 * (std::log(static_cast<double>(n)) + z);
}

class EmpiricalCdf {
 public:
  explicit EmpiricalCdf(std::vector<double> samples) : x_(std::move(samples)) {
    if (x_.empty()) throw ConfigError("EmpiricalCdf needs at least one sample");
    std::sort(x_.begin(), x_.end());
  }
  std::size_t size() const { return x_.size(); }
  const std::vector<double> &sorted() const { return x_; }
  /// Fraction of samples <= v.
  double operator()(double v) const {
    return static_cast<double>(std::upper_bound(x_.begin(), x_.end(), v) -
                               x_.begin()) /
           static_cast<double>(x_.size());
  }

 private:
  std::vector<double> x_;
};

/// sup_x |F_n(x) - F(x)|, attained at a sample point from the left or right.
inline double ks_distance(const EmpiricalCdf &cdf,
                          const std::function<double(double)> &target) {
  const auto &x = cdf.sorted();
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = target(x[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f,
                             f - static_cast<double>(i) / n));
  }
  return d;
}

/// Half-width of the two-sided DKW confidence band at level 1 - alpha.
inline double dkw_band(std::size_t n, double alpha = 0.01) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

/// Standard deviation of the limiting Kolmogorov distribution, scaled by
/// 1/sqrt(n); used as the noise scale of a KS statistic.
inline double ks_sigma(std::size_t n) {
  return 0.2603 / std::sqrt(static_cast<double>(n));
}

inline double chi_square_sf(double stat, double df) {
  if (df <= 0.0) return 1.0;
  boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, std::max(stat, 0.0)));
}

struct ChiSquare {
  double statistic = 0.0;
  double df = 0.0;
  double p_value = 1.0;
};

/// Pearson goodness of fit; cells with expected count below 5 are pooled.
inline ChiSquare chi_square_gof(const std::vector<double> &observed,
                                const std::vector<double> &probs, double n) {
  ChiSquare r;
  double pooled_o = 0.0, pooled_e = 0.0;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double e = probs[i] * n;
    if (e < 5.0) {
      pooled_o += observed[i];
      pooled_e += e;
      continue;
    }
    r.statistic += (observed[i] - e) * (observed[i] - e) / e;
    ++cells;
  }
  if (pooled_e > 0.0) {
    r.statistic += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
    ++cells;
  }
  r.df = cells - 1;
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

/// Two-sample chi-square homogeneity test for equal sample sizes.
inline ChiSquare chi_square_two_sample(const std::vector<double> &a,
                                       const std::vector<double> &b) {
  ChiSquare r;
  int cells = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double s = a[i] + b[i];
    if (s <= 0.0) continue;
    r.statistic += (a[i] - b[i]) * (a[i] - b[i]) / s;
    ++cells;
  }
  r.df = cells - 1;
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double stderr_ = 0.0;
};

inline MeanVar mean_var(const std::vector<double> &v) {
  MeanVar r;
  const double n = static_cast<double>(v.size());
  if (v.empty()) return r;
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.var = ss / (n - 1.0);
  }
  r.stderr_ = std::sqrt(r.var / n);
  return r;
}

/// Binomial proportion with its standard error.
struct Proportion {
  double p = 0.0;
  double stderr_ = 0.0;
  std::uint64_t n = 0;
};

inline Proportion proportion(std::uint64_t hits, std::uint64_t n) {
  Proportion r;
  r.n = n;
  if (n == 0) return r;
  r.p = static_cast<double>(hits) / static_cast<double>(n);
  r.stderr_ = std::sqrt(r.p * (1.0 - r.p) / static_cast<double>(n));
  return r;
}

/// Noise scale for comparing a proportion with an exact value p0.
inline double binomial_sigma(double p0, std::uint64_t n) {
  return std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
}

// ---------------------------------------------------------------------------
// Point process of uncovered sites

/// B_N^l together with the level offset z; uncovered sites are observed at
/// u = g(0) (log|B_N^l| + z).
struct BoxWindow {
  int l = 2;
  std::int64_t side = 8;
  double z = 0.0;

  PointSet sites(int dim) const { return box_set(dim, side, l); }
  std::size_t size() const {
    std::size_t n = 1;
    for (int i = 0; i < l; ++i) n *= static_cast<std::size_t>(side);
    return n;
  }
};

/// Axis-aligned rectangle in [0,1]^l, half-open except at the top edge 1.
struct Rectangle {
  std::vector<double> lo, hi;

  bool contains_scaled(const LatticePoint &x, std::int64_t side) const {
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double v = static_cast<double>(x[static_cast<int>(i)]) /
                       static_cast<double>(side);
      if (v < lo[i]) return false;
      if (hi[i] < 1.0 ? v >= hi[i] : v > hi[i]) return false;
    }
    return true;
  }
  double volume() const {
    double v = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

struct WindowRectStats {
  std::size_t sites = 0;  // |N I ∩ B|
  double lebesgue = 0.0;  // lambda_l(I)
  double mean = 0.0;
  double mean_stderr = 0.0;
  double expected_mean = 0.0;  // e^{-z} |N I ∩ B| / |B|, exact at finite N
  double variance = 0.0;
  double dispersion = 0.0;
  double empty_freq = 0.0;
  double empty_stderr = 0.0;
  double empty_independent = 0.0;  // (1 - e^{-z}/|B|)^{|N I ∩ B|}
  double empty_limit = 0.0;        // exp(-e^{-z} lambda_l(I))
};

struct WindowPairStats {
  std::size_t first = 0, second = 0;
  double correlation = 0.0;
  double stderr_ = 0.0;
};

struct WindowReport {
  std::vector<WindowRectStats> rects;
  std::vector<WindowPairStats> pairs;
  std::size_t replicas = 0;
};

/// Counts uncovered sites per rectangle across replicas; each replica is
/// an IndexSet over `box` (the sites of the window, in box_set order).
inline WindowReport poisson_window_test(
    const std::vector<IndexSet> &uncovered, const PointSet &box,
    const BoxWindow &window, const std::vector<Rectangle> &rects,
    const std::vector<std::pair<std::size_t, std::size_t>> &pairs = {}) {
  WindowReport rep;
  rep.replicas = uncovered.size();
  if (uncovered.empty()) throw ConfigError("poisson_window_test: no replicas");
  const double nb = static_cast<double>(box.size());
  std::vector<std::vector<char>> member(rects.size(),
                                        std::vector<char>(box.size(), 0));
  std::vector<std::vector<double>> counts(rects.size());
  for (std::size_t r = 0; r < rects.size(); ++r) {
    if (rects[r].lo.size() != static_cast<std::size_t>(window.l) ||
        rects[r].hi.size() != static_cast<std::size_t>(window.l))
      throw ConfigError("poisson_window_test: rectangle dimension != l");
    for (std::size_t i = 0; i < box.size(); ++i)
      member[r][i] = rects[r].contains_scaled(box[i], window.side) ? 1 : 0;
  }
  for (const auto &u : uncovered) {
    for (std::size_t r = 0; r < rects.size(); ++r) {
      double c = 0.0;
      u.for_each([&](std::size_t i) { c += member[r][i]; });
      counts[r].push_back(c);
    }
  }
  const double ez = std::exp(-window.z);
  for (std::size_t r = 0; r < rects.size(); ++r) {
    WindowRectStats s;
    s.sites = static_cast<std::size_t>(
        std::count(member[r].begin(), member[r].end(), 1));
    s.lebesgue = rects[r].volume();
    const MeanVar mv = mean_var(counts[r]);
    s.mean = mv.mean;
    s.mean_stderr = mv.stderr_;
    s.variance = mv.var;
    s.dispersion = mv.mean > 0.0 ? mv.var / mv.mean : 0.0;
    s.expected_mean = ez * static_cast<double>(s.sites) / nb;
    std::uint64_t empties = 0;
    for (double c : counts[r]) empties += (c == 0.0);
    const Proportion pe = proportion(empties, counts[r].size());
    s.empty_freq = pe.p;
    s.empty_stderr = pe.stderr_;
    s.empty_independent =
        std::pow(1.0 - ez / nb, static_cast<double>(s.sites));
    s.empty_limit = std::exp(-ez * s.lebesgue);
    rep.rects.push_back(s);
  }
  for (auto [a, b] : pairs) {
    WindowPairStats ps;
    ps.first = a;
    ps.second = b;
    const MeanVar ma = mean_var(counts.at(a)), mb = mean_var(counts.at(b));
    double cov = 0.0;
    for (std::size_t i = 0; i < counts[a].size(); ++i)
      cov += (counts[a][i] - ma.mean) * (counts[b][i] - mb.mean);
    cov /= static_cast<double>(counts[a].size()) - 1.0;
    const double denom = std::sqrt(ma.var * mb.var);
    ps.correlation = denom > 0.0 ? cov / denom : 0.0;
    ps.stderr_ = 1.0 / std::sqrt(static_cast<double>(counts[a].size()));
    rep.pairs.push_back(ps);
  }
  return rep;
}

/// Exact variance/mean of the number of vacant sites of `sites` at level u:
/// 1 - p + sum_{x != y} (P(x, y vacant) - p^2) / (n p), p = e^{-u/g(0)}.
inline double exact_vacant_dispersion(const PointSet &sites, double u,
                                      const GreenTable &table) {
  const double g0 = table.g0();
  const double p = std::exp(-u / g0);
  const double n = static_cast<double>(sites.size());
  double cov = 0.0;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (std::size_t j = i + 1; j < sites.size(); ++j)
      cov += 2.0 * (std::exp(-u * 2.0 / (g0 + table(sites[i] - sites[j]))) - p * p);
  return (n * p * (1.0 - p) + cov) / (n * p);
}

// ---------------------------------------------------------------------------
// Last covered sites

/// Indices of the k sites covered last: descending U, ties broken by
/// lexicographic point order.
inline std::vector<std::size_t> last_covered(const CoverResult &r, std::size_t k) {
  const PointSet &a = *r.set;
  std::vector<std::size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), 0);
  k = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k),
                    idx.end(), [&](std::size_t i, std::size_t j) {
                      if (r.levels[i] != r.levels[j]) return r.levels[i] > r.levels[j];
                      return a[i] < a[j];
                    });
  idx.resize(k);
  return idx;
}

/// Fraction of replicas in which two of the last k covered sites lie within
/// delta * N of each other.
inline Proportion separation_statistic(const std::vector<CoverResult> &reps,
                                       std::size_t k, double delta,
                                       std::int64_t side) {
  if (k < 2) throw ConfigError("separation_statistic: k must be >= 2");
  const double thr = delta * static_cast<double>(side);
  const double thr2 = thr * thr;
  std::uint64_t close = 0;
  for (const auto &r : reps) {
    const auto last = last_covered(r, k);
    bool found = false;
    for (std::size_t i = 0; i < last.size() && !found; ++i)
      for (std::size_t j = i + 1; j < last.size() && !found; ++j)
        found = ((*r.set)[last[i]] - (*r.set)[last[j]]).norm2() <= thr2;
    close += found;
  }
  return proportion(close, reps.size());
}

}  // namespace interlace

#endif  // INTERLACE_STATS_HPP_
