#ifndef INTERLACE_INTERLACEMENT_HPP_
#define INTERLACE_INTERLACEMENT_HPP_

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "interlace/errors.hpp"
#include "interlace/greens.hpp"
#include "interlace/index_set.hpp"
#include "interlace/lattice.hpp"
#include "interlace/potential.hpp"
#include "interlace/rng.hpp"

namespace interlace {

struct SamplerConfig {
  std::int64_t shell_radius_pad = 10;
  std::uint64_t max_steps_per_trajectory = 10'000'000;

  void validate() const {
    if (shell_radius_pad < 1) throw ConfigError("shell_radius_pad must be >= 1");
    if (max_steps_per_trajectory < 1)
      throw ConfigError("max_steps_per_trajectory must be >= 1");
  }
};

/// Range of one trajectory intersected with K, as indices into K.
struct TrajectoryHitSet {
  std::size_t start = 0;
  IndexSet hits;
  std::uint64_t steps_used = 0;
};

/// Reusable buffer for drawing hit sets without reallocating.
class HitScratch {
 public:
  void prepare(std::size_t n) {
    if (mask_.universe() != n) {
      mask_ = IndexSet(n);
      visited_.clear();
    } else {
      for (auto i : visited_) mask_.reset(i);
      visited_.clear();
    }
    steps = 0;
  }
  void hit(std::size_t i) {
    if (!mask_.test(i)) {
      mask_.set(i);
      visited_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  const std::vector<std::uint32_t> &visited() const { return visited_; }
  const IndexSet &mask() const { return mask_; }

  std::size_t start = 0;
  std::uint64_t steps = 0;

 private:
  IndexSet mask_;
  std::vector<std::uint32_t> visited_;
};

/// Draws range(w) ∩ K for trajectories w of the interlacement entering K,
/// under the normalised entrance law e_K / cap(K).
class HitSetSampler {
 public:
  virtual ~HitSetSampler() = default;

  const PointSet &set() const { return *set_; }
  std::shared_ptr<const PointSet> set_ptr() const { return set_; }
  std::size_t size() const { return set_->size(); }
  double capacity() const { return capacity_; }
  double g0() const { return g0_; }
  const std::vector<double> &weights() const { return weights_; }

  /// Fills scratch with the hit indices of one trajectory.
  virtual void sample_into(RngStream &rng, HitScratch &scratch) const = 0;

  TrajectoryHitSet sample(RngStream &rng) const {
    HitScratch s;
    s.prepare(size());
    sample_into(rng, s);
    return {s.start, s.mask(), s.steps};
  }

 protected:
  HitSetSampler(const EquilibriumMeasure &eq, double g0)
      : set_(std::make_shared<const PointSet>(eq.set)),
        weights_(eq.weights),
        capacity_(eq.capacity),
        g0_(g0) {
    if (!(capacity_ > 0.0)) throw NumericalError("sampler: zero capacity");
    start_cdf_.resize(weights_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      acc += weights_[i];
      start_cdf_[i] = acc;
    }
  }

  std::size_t draw_start(RngStream &rng) const {
    const double u = rng.uniform() * start_cdf_.back();
    auto it = std::upper_bound(start_cdf_.begin(), start_cdf_.end(), u);
    std::size_t i = static_cast<std::size_t>(it - start_cdf_.begin());
    if (i >= weights_.size()) i = weights_.size() - 1;
    while (weights_[i] == 0.0) --i;  // round-off at the top end
    return i;
  }

  std::shared_ptr<const PointSet> set_;
  std::vector<double> weights_;
  std::vector<double> start_cdf_;
  double capacity_;
  double g0_;
};

/// Samples the walk itself. Free simple random walk inside a shell around
/// K; at the first exit point z the walk returns to K with probability
/// h(z) = P_z(H_K < inf) (exact, last-exit identity). A returning walk is
/// run under the Doob transform p(z, z') = h(z') / (2d h(z)) until it
/// re-enters K, after which it is free again. Every visit to K is recorded.
///
/// Conditioned excursions reach distance R with probability about r/R, and
/// each new far site costs Green evaluations. Once an excursion leaves twice
/// the shell radius, its entry point is drawn directly from the harmonic
/// measure P_z(X_{H_K} = y | H_K < inf) = (g(z, .) G^{-1})_y / h(z); the
/// path in between never touches K, so the hit set keeps its law.
class HTransformSampler final : public HitSetSampler {
 public:
  HTransformSampler(const EquilibriumMeasure &eq, const GreenTable &table,
                    SamplerConfig cfg = {})
      : HitSetSampler(eq, table.g0()), eq_(eq), table_(table), cfg_(cfg) {
    cfg_.validate();
    if (eq.set.dim() != table.dim())
      throw ConfigError("sampler: set and Green table dimensions differ");
    const int d = eq.set.dim();
    bbox_ = bounding_box(eq.set);
    double half_diag2 = 0.0;
    for (int i = 0; i < d; ++i) {
      center_[static_cast<std::size_t>(i)] = 0.5 * static_cast<double>(bbox_.lo[i] + bbox_.hi[i]);
      const double half = 0.5 * static_cast<double>(bbox_.hi[i] - bbox_.lo[i]);
      half_diag2 += half * half;
    }
    // Contains {x : d(x, K) <= diameter(K) + pad}.
    const double diam = set_metrics(eq.set).diameter;
    const double r = std::sqrt(half_diag2) + diam + static_cast<double>(cfg_.shell_radius_pad);
    shell_r2_ = r * r;
    outer_r2_ = 4.0 * shell_r2_;
    llt_.compute(green_matrix(eq.set, table));
    if (llt_.info() != Eigen::Success)
      throw NumericalError("sampler: Green matrix not positive definite");
  }

  double shell_radius() const { return std::sqrt(shell_r2_); }

  /// P_z(H_K < inf), memoised per site.
  double h(const LatticePoint &z) const {
    {
      std::shared_lock lock(h_mu_);
      auto it = h_cache_.find(z);
      if (it != h_cache_.end()) return it->second;
    }
    const double v = hitting_prob(z, eq_, table_);
    std::unique_lock lock(h_mu_);
    h_cache_.emplace(z, v);
    return v;
  }

  void sample_into(RngStream &rng, HitScratch &s) const override {
    s.prepare(size());
    const PointSet &k = set();
    const int d = k.dim();
    const auto two_d = 2 * static_cast<std::uint64_t>(d);
    s.start = draw_start(rng);
    s.hit(s.start);
    LatticePoint p = k[s.start];
    const std::uint64_t budget = cfg_.max_steps_per_trajectory;
    auto spend = [&] {
      if (++s.steps > budget) {
        throw StepLimitExceeded("trajectory exceeded " + std::to_string(budget) +
                                " steps");
      }
    };
    std::vector<double> hn(two_d);
    while (true) {
      // Free walk until the first exit from the shell.
      while (true) {
        spend();
        step_to_neighbor(p, static_cast<unsigned>(rng.below(two_d)));
        if (bbox_.contains(p)) {
          const auto idx = k.index_of(p);
          if (idx >= 0) s.hit(static_cast<std::size_t>(idx));
        }
        if (outside_shell(p)) break;
      }
      // Return or escape, decided exactly.
      double hz = h(p);
      if (!(rng.uniform() < hz)) return;
      // Conditioned on returning: Doob h-transform until K is hit.
      while (true) {
        spend();
        double total = 0.0;
        LatticePoint q = p;
        for (unsigned j = 0; j < two_d; ++j) {
          step_to_neighbor(q, j);
          hn[j] = (bbox_.contains(q) && k.contains(q)) ? 1.0 : h(q);
          total += hn[j];
          q = p;
        }
        // Harmonicity of h off K: the transformed row sums to one.
        assert(std::fabs(total / static_cast<double>(two_d) - hz) <= 1e-8);
        const double u = rng.uniform() * total;
        unsigned j = 0;
        double acc = hn[0];
        while (u >= acc && j + 1 < two_d) acc += hn[++j];
        step_to_neighbor(p, j);
        hz = hn[j];
        if (bbox_.contains(p)) {
          const auto idx = k.index_of(p);
          if (idx >= 0) {
            s.hit(static_cast<std::size_t>(idx));
            break;
          }
        }
        if (radius2(p) > outer_r2_) {
          const std::size_t y = draw_entry(p, rng);
          p = k[y];
          s.hit(y);
          break;
        }
      }
    }
  }

 private:
  double radius2(const LatticePoint &p) const {
    double r2 = 0.0;
    for (int i = 0; i < p.dim(); ++i) {
      const double v = static_cast<double>(p[i]) - center_[static_cast<std::size_t>(i)];
      r2 += v * v;
    }
    return r2;
  }
  bool outside_shell(const LatticePoint &p) const { return radius2(p) > shell_r2_; }

  /// Entry point into K from z, conditioned on hitting K.
  std::size_t draw_entry(const LatticePoint &z, RngStream &rng) const {
    const PointSet &k = set();
    Eigen::VectorXd gz(static_cast<Eigen::Index>(k.size()));
    for (std::size_t i = 0; i < k.size(); ++i)
      gz(static_cast<Eigen::Index>(i)) = table_(z - k[i]);
    const Eigen::VectorXd hm = llt_.solve(gz);
    double total = 0.0;
    for (Eigen::Index i = 0; i < hm.size(); ++i) total += std::max(0.0, hm(i));
    const double u = rng.uniform() * total;
    double acc = 0.0;
    std::size_t last = 0;
    for (Eigen::Index i = 0; i < hm.size(); ++i) {
      if (hm(i) <= 0.0) continue;
      last = static_cast<std::size_t>(i);
      acc += hm(i);
      if (u < acc) return last;
    }
    return last;
  }

  EquilibriumMeasure eq_;
  const GreenTable &table_;
  SamplerConfig cfg_;
  BoundingBox bbox_;
  std::array<double, kMaxDim> center_{};
  double shell_r2_ = 0.0;
  double outer_r2_ = 0.0;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  mutable std::shared_mutex h_mu_;
  mutable std::unordered_map<LatticePoint, double, LatticePointHash> h_cache_;
};

/// Samples the trace of the walk on K directly. By the strong Markov
/// property at the first return to K, G = I + Q G for x, y in K, where Q is
/// the first-return kernel Q(x, y) = P_x(first return to K is at y). So
/// Q = I - G^{-1}, its row deficit is e_K, and range(w) ∩ K is the set of
/// states visited by the killed Markov chain on K with kernel Q.
class TraceChainSampler final : public HitSetSampler {
 public:
  TraceChainSampler(const EquilibriumMeasure &eq, const GreenTable &table)
      : HitSetSampler(eq, table.g0()) {
    const std::size_t n = eq.set.size();
    Eigen::MatrixXd inv;
    {
      const Eigen::MatrixXd g = green_matrix(eq.set, table);
      Eigen::LLT<Eigen::MatrixXd> llt(g);
      if (llt.info() != Eigen::Success)
        throw NumericalError("trace chain: Green matrix not positive definite");
      inv = llt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    }
    constexpr double kNegTol = 1e-9;
    cum_.resize(n * n);
    row_total_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto col = inv.col(static_cast<Eigen::Index>(i));  // symmetric
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double q = (i == j ? 1.0 : 0.0) - col(static_cast<Eigen::Index>(j));
        if (q < 0.0) {
          if (q < -kNegTol) {
            throw NumericalError("trace chain: negative return probability " +
                                 std::to_string(q));
          }
          q = 0.0;
        }
        acc += q;
        cum_[i * n + j] = acc;
      }
      row_total_[i] = acc;
      if (std::fabs(1.0 - acc - eq.weights[i]) > 1e-7) {
        throw NumericalError("trace chain: kernel deficit disagrees with e_K at " +
                             eq.set[i].to_string());
      }
    }
  }

  /// P_x(first return to K at y).
  double return_prob(std::size_t x, std::size_t y) const {
    const std::size_t n = size();
    const double prev = y == 0 ? 0.0 : cum_[x * n + y - 1];
    return cum_[x * n + y] - prev;
  }

  void sample_into(RngStream &rng, HitScratch &s) const override {
    s.prepare(size());
    const std::size_t n = size();
    std::size_t x = draw_start(rng);
    s.start = x;
    s.hit(x);
    while (true) {
      const double u = rng.uniform();
      if (!(u < row_total_[x])) return;  // escapes for good
      const double *row = cum_.data() + x * n;
      x = static_cast<std::size_t>(std::upper_bound(row, row + n, u) - row);
      if (x >= n) x = n - 1;
      ++s.steps;
      s.hit(x);
    }
  }

 private:
  std::vector<double> cum_;  // row-wise cumulative sums of Q
  std::vector<double> row_total_;
};

enum class SamplerKind { trace, walk };

inline std::unique_ptr<HitSetSampler> make_sampler(SamplerKind kind,
                                                   const EquilibriumMeasure &eq,
                                                   const GreenTable &table,
                                                   const SamplerConfig &cfg = {}) {
  if (kind == SamplerKind::walk)
    return std::make_unique<HTransformSampler>(eq, table, cfg);
  return std::make_unique<TraceChainSampler>(eq, table);
}

/// One trajectory hit set via the walk sampler.
inline TrajectoryHitSet sample_hitset(const EquilibriumMeasure &eq,
                                      const GreenTable &table,
                                      const SamplerConfig &cfg, RngStream &rng) {
  return HTransformSampler(eq, table, cfg).sample(rng);
}

// ---------------------------------------------------------------------------
// Vacant sets and cover levels

/// K \ I^u: union of Poisson(u cap(K)) independent hit sets, complemented.
inline IndexSet sample_vacant(const HitSetSampler &sampler, double u,
                              RngStream &rng, HitScratch &scratch) {
  if (u < 0.0) throw ConfigError("sample_vacant: level must be >= 0");
  IndexSet vacant(sampler.size(), true);
  const std::uint64_t n_traj = rng.poisson(u * sampler.capacity());
  for (std::uint64_t t = 0; t < n_traj; ++t) {
    sampler.sample_into(rng, scratch);
    for (auto i : scratch.visited()) vacant.reset(i);
  }
  return vacant;
}

inline IndexSet sample_vacant(const HitSetSampler &sampler, double u,
                              RngStream &rng) {
  HitScratch scratch;
  return sample_vacant(sampler, u, rng, scratch);
}

/// Per-site cover levels U_x and M(A) = max_x U_x for one replica.
struct CoverResult {
  std::shared_ptr<const PointSet> set;
  std::vector<double> levels;
  double cover_level = 0.0;
  std::uint64_t n_trajectories = 0;
  /// Site achieving M(A).
  std::size_t last_covered = 0;
};

/// Arrival labels form a Poisson process of rate cap(A); each arrival
/// carries an independent hit set, and U_x is the first label whose hit set
/// contains x. Stops once A is covered.
inline CoverResult sample_cover_levels(const HitSetSampler &sampler,
                                       RngStream &rng, HitScratch &scratch) {
  const std::size_t n = sampler.size();
  if (n == 0) throw ConfigError("sample_cover_levels: empty set");
  CoverResult r;
  r.set = sampler.set_ptr();
  r.levels.assign(n, std::numeric_limits<double>::infinity());
  std::size_t remaining = n;
  double label = 0.0;
  const double rate = sampler.capacity();
  while (remaining > 0) {
    label += rng.exponential(rate);
    ++r.n_trajectories;
    sampler.sample_into(rng, scratch);
    for (auto i : scratch.visited()) {
      if (std::isinf(r.levels[i])) {
        r.levels[i] = label;
        r.last_covered = i;
        --remaining;
      }
    }
  }
  r.cover_level = label;
  return r;
}

inline CoverResult sample_cover_levels(const HitSetSampler &sampler,
                                       RngStream &rng) {
  HitScratch scratch;
  return sample_cover_levels(sampler, rng, scratch);
}

/// Level g(0)(1 - eps) log|A| at which A_eps is observed.
inline double uncovered_level(double g0, std::size_t n, double eps) {
  return g0 * (1.0 - eps) * std::log(static_cast<double>(n));
}

/// A_eps = points of A not yet covered at level g(0)(1 - eps) log|A|.
inline IndexSet uncovered_set(const HitSetSampler &sampler, double eps,
                              RngStream &rng, HitScratch &scratch) {
  if (!(eps > 0.0 && eps < 1.0))
    throw ConfigError("uncovered_set: eps must be in (0, 1)");
  if (sampler.size() < 2) throw ConfigError("uncovered_set: need |A| >= 2");
  return sample_vacant(sampler, uncovered_level(sampler.g0(), sampler.size(), eps),
                       rng, scratch);
}

inline IndexSet uncovered_set(const HitSetSampler &sampler, double eps,
                              RngStream &rng) {
  HitScratch scratch;
  return uncovered_set(sampler, eps, rng, scratch);
}

// ---------------------------------------------------------------------------
// Good sets

/// Pairwise separation required of a good set: (2^{1/eps} |A|)^{1/(2(d-1))}.
inline double good_set_separation(std::size_t n, double eps, int d) {
  return std::pow(std::pow(2.0, 1.0 / eps) * static_cast<double>(n),
                  1.0 / (2.0 * (d - 1)));
}

/// True iff K is nonempty, ||K| - |A|^eps| <= |A|^{2 eps / 3} and all
/// distinct points of K are at least good_set_separation apart.
inline bool good_set_check(const std::vector<LatticePoint> &k, std::size_t a_size,
                           int d, double eps) {
  if (k.empty()) return false;
  const double n = static_cast<double>(a_size);
  const double target = std::pow(n, eps);
  if (std::fabs(static_cast<double>(k.size()) - target) >
      std::pow(n, 2.0 * eps / 3.0))
    return false;
  const double sep2 = std::pow(good_set_separation(a_size, eps, d), 2);
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j)
      if ((k[i] - k[j]).norm2() < sep2) return false;
  return true;
}

inline bool good_set_check(const PointSet &k, const PointSet &a, double eps) {
  for (const auto &p : k)
    if (!a.contains(p)) throw ConfigError("good_set_check: K is not a subset of A");
  return good_set_check(k.points(), a.size(), a.dim(), eps);
}

inline bool good_set_check(const IndexSet &k, const PointSet &a, double eps) {
  std::vector<LatticePoint> pts;
  k.for_each([&](std::size_t i) { pts.push_back(a[i]); });
  return good_set_check(pts, a.size(), a.dim(), eps);
}

}  // namespace interlace

#endif  // INTERLACE_INTERLACEMENT_HPP_
