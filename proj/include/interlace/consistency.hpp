#ifndef INTERLACE_CONSISTENCY_HPP_
#define INTERLACE_CONSISTENCY_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "interlace/errors.hpp"
#include "interlace/greens.hpp"
#include "interlace/interlacement.hpp"
#include "interlace/parallel.hpp"
#include "interlace/potential.hpp"
#include "interlace/stats.hpp"

namespace interlace {

inline constexpr std::size_t kMaxExactSubsetLaw = 12;

/// Law of the vacant subset of K at level u, indexed by IndexSet::code().
/// P(S subset of vacant) = exp(-u cap(S)); Moebius inversion over supersets
/// gives P(vacant = S).
inline std::vector<double> exact_vacant_law(const PointSet &k, double u,
                                            const GreenTable &table) {
  const std::size_t n = k.size();
  if (n == 0 || n > kMaxExactSubsetLaw)
    throw ConfigError("exact_vacant_law: need 1 <= |K| <= " +
                      std::to_string(kMaxExactSubsetLaw));
  const std::size_t m = std::size_t{1} << n;
  std::vector<double> f(m, 1.0);
  for (std::size_t s = 1; s < m; ++s) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      if (s >> i & 1u) idx.push_back(i);
    f[s] = std::exp(-u * capacity(k.subset(idx), table));
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t s = 0; s < m; ++s)
      if (!(s >> i & 1u)) f[s] -= f[s | (std::size_t{1} << i)];
  for (auto &p : f) p = std::max(p, 0.0);
  return f;
}

struct IncrementReport {
  double u = 0.0, u2 = 0.0;
  std::size_t replicas = 0, dropped = 0;
  /// Counts per vacant-subset code, sampled directly at u2 and as
  /// (vacant at u) minus an independent (u2 - u) increment.
  std::vector<double> direct, incremental, exact;
  ChiSquare two_sample, gof_direct, gof_incremental;
  bool pass(double alpha = 0.01) const { return two_sample.p_value >= alpha; }
};

inline IncrementReport increment_consistency_test(const HitSetSampler &sampler,
                                                  double u, double u2,
                                                  std::size_t replicas,
                                                  std::uint64_t seed,
                                                  const GreenTable &table,
                                                  unsigned workers = 1) {
  if (!(u >= 0.0 && u <= u2))
    throw ConfigError("increment test: need 0 <= u <= u2");
  if (replicas < 1) throw ConfigError("increment test: replicas must be >= 1");
  const std::size_t n = sampler.size();
  if (n > kMaxExactSubsetLaw)
    throw ConfigError("increment test: |K| must be <= " +
                      std::to_string(kMaxExactSubsetLaw));
  struct Pair {
    std::uint64_t direct, incremental;
  };
  auto batch = run_replicas(replicas, workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    HitScratch scratch;
    const IndexSet direct = sample_vacant(sampler, u2, rng, scratch);
    IndexSet staged = sample_vacant(sampler, u, rng, scratch);
    staged &= sample_vacant(sampler, u2 - u, rng, scratch);
    return Pair{direct.code(), staged.code()};
  });
  IncrementReport rep;
  rep.u = u;
  rep.u2 = u2;
  rep.replicas = batch.results.size();
  rep.dropped = batch.dropped;
  const std::size_t m = std::size_t{1} << n;
  rep.direct.assign(m, 0.0);
  rep.incremental.assign(m, 0.0);
  for (const auto &p : batch.results) {
    rep.direct[p.direct] += 1.0;
    rep.incremental[p.incremental] += 1.0;
  }
  rep.exact = exact_vacant_law(sampler.set(), u2, table);
  rep.two_sample = chi_square_two_sample(rep.direct, rep.incremental);
  const double total = static_cast<double>(rep.replicas);
  rep.gof_direct = chi_square_gof(rep.direct, rep.exact, total);
  rep.gof_incremental = chi_square_gof(rep.incremental, rep.exact, total);
  return rep;
}

struct DecouplingRow {
  std::int64_t r = 0;
  double distance = 0.0;  // d(K1, K2 + shift)
  double p1 = 0.0, p2 = 0.0, p12 = 0.0;
  /// |P(B1 B2) - P(B1) P(B2)| and its delta-method standard error.
  double delta = 0.0;
  double delta_stderr = 0.0;
  /// exp(-u cap(K1 u K2)) - exp(-u (cap K1 + cap K2)), signed.
  double exact_cov = 0.0;
  double scaled = 0.0;  // delta * r^{d-2}
  double exact_scaled = 0.0;
  std::size_t dropped = 0;
};

/// K2 shifted along the first axis so that its leftmost point sits r to the
/// right of the rightmost point of K1.
inline PointSet place_at_separation(const PointSet &k1, const PointSet &k2,
                                    std::int64_t r) {
  std::int64_t right = std::numeric_limits<std::int64_t>::min();
  std::int64_t left = std::numeric_limits<std::int64_t>::max();
  for (const auto &p : k1) right = std::max(right, p[0]);
  for (const auto &p : k2) left = std::min(left, p[0]);
  return k2.translated(LatticePoint::unit(k1.dim(), 0, right - left + r));
}

inline std::vector<DecouplingRow> decoupling_test(
    const PointSet &k1, const PointSet &k2, double u,
    const std::vector<std::int64_t> &separations, std::size_t replicas,
    std::uint64_t seed, const GreenTable &table, unsigned workers = 1,
    SamplerKind kind = SamplerKind::trace, const SamplerConfig &cfg = {}) {
  if (k1.empty() || k2.empty()) throw ConfigError("decoupling: sets must be nonempty");
  if (k1.dim() != k2.dim()) throw ConfigError("decoupling: dimension mismatch");
  if (u < 0.0) throw ConfigError("decoupling: level must be >= 0");
  if (replicas < 2) throw ConfigError("decoupling: replicas must be >= 2");
  const int d = k1.dim();
  const double cap1 = capacity(k1, table), cap2 = capacity(k2, table);
  std::vector<DecouplingRow> rows;
  for (std::size_t s = 0; s < separations.size(); ++s) {
    const std::int64_t r = separations[s];
    if (r < 1) throw ConfigError("decoupling: separations must be >= 1");
    const PointSet k2r = place_at_separation(k1, k2, r);
    PointSet joint = k1;
    for (const auto &p : k2r)
      if (!joint.insert(p)) throw ConfigError("decoupling: K1 and K2 overlap");
    const auto eq = equilibrium(joint, table);
    const auto sampler = make_sampler(kind, eq, table, cfg);
    const std::size_t n1 = k1.size();
    struct Events {
      bool b1, b2;
    };
    auto batch = run_replicas(replicas, workers, [&](std::size_t i) {
      RngStream rng(seed, s * replicas + i);
      const IndexSet v = sample_vacant(*sampler, u, rng);
      Events e{true, true};
      for (std::size_t j = 0; j < joint.size(); ++j)
        if (!v.test(j)) (j < n1 ? e.b1 : e.b2) = false;
      return e;
    });
    DecouplingRow row;
    row.r = r;
    row.distance = set_distance(k1, k2r);
    row.dropped = batch.dropped;
    const double nr = static_cast<double>(batch.results.size());
    double c1 = 0, c2 = 0, c12 = 0;
    for (const auto &e : batch.results) {
      c1 += e.b1;
      c2 += e.b2;
      c12 += e.b1 && e.b2;
    }
    row.p1 = c1 / nr;
    row.p2 = c2 / nr;
    row.p12 = c12 / nr;
    const double diff = row.p12 - row.p1 * row.p2;
    row.delta = std::fabs(diff);
    // Influence function of p12 - p1 p2.
    double ss = 0.0;
    for (const auto &e : batch.results) {
      const double phi = (e.b1 && e.b2) - row.p2 * e.b1 - row.p1 * e.b2 -
                         (row.p12 - 2.0 * row.p1 * row.p2);
      ss += phi * phi;
    }
    row.delta_stderr = std::sqrt(ss / (nr - 1.0) / nr);
    row.exact_cov = std::exp(-u * eq.capacity) - std::exp(-u * (cap1 + cap2));
    const double rs = std::pow(static_cast<double>(r), d - 2.0);
    row.scaled = row.delta * rs;
    row.exact_scaled = std::fabs(row.exact_cov) * rs;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace interlace

#endif  // INTERLACE_CONSISTENCY_HPP_
