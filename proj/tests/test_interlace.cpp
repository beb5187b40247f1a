#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "interlace/consistency.hpp"
#include "interlace/interlacement.hpp"
#include "interlace/stats.hpp"
#include "oracles.hpp"

using namespace interlace;

namespace {

GreenTable &table3() {
  static GreenTable t(3);
  return t;
}

// |observed - expected| in units of the binomial standard deviation.
double zscore(double hits, double n, double p) {
  return (hits / n - p) / std::sqrt(p * (1.0 - p) / n);
}

}  // namespace

TEST(Sampler, SingletonAlwaysHitsItself) {
  const auto eq = equilibrium(parse_point_set(3, "2,2,2"), table3());
  for (auto kind : {SamplerKind::trace, SamplerKind::walk}) {
    const auto s = make_sampler(kind, eq, table3());
    RngStream rng(1, 0);
    for (int i = 0; i < 200; ++i) {
      const auto h = s->sample(rng);
      EXPECT_EQ(h.start, 0u);
      EXPECT_EQ(h.hits.count(), 1u);
    }
  }
}

TEST(Sampler, StartIsAlwaysHit) {
  const auto eq = equilibrium(box_set(3, 3, 2), table3());
  TraceChainSampler s(eq, table3());
  RngStream rng(2, 0);
  for (int i = 0; i < 2000; ++i) {
    const auto h = s.sample(rng);
    EXPECT_TRUE(h.hits.test(h.start));
    EXPECT_GT(eq.weights[h.start], 0.0);
  }
}

TEST(Sampler, ReturnKernelRowDeficitIsEscape) {
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;1,0,0;0,2,0"), table3());
  TraceChainSampler s(eq, table3());
  for (std::size_t i = 0; i < 3; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 3; ++j) row += s.return_prob(i, j);
    EXPECT_NEAR(1.0 - row, eq.weights[i], 1e-9);
  }
  // From a singleton the return probability is 1 - 1/g(0).
  const auto one = equilibrium(parse_point_set(3, "0,0,0"), table3());
  EXPECT_NEAR(TraceChainSampler(one, table3()).return_prob(0, 0), 1.0 - 1.0 / table3().g0(),
              1e-12);
}

TEST(Sampler, WalkAndTraceChainAgree) {
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;4,0,0;1,1,0"), table3());
  TraceChainSampler trace(eq, table3());
  HTransformSampler walk(eq, table3());
  RngStream r1(3, 0), r2(3, 1);
  const int n = 30000;
  std::vector<double> a(8, 0.0), b(8, 0.0);
  for (int i = 0; i < n; ++i) {
    a[trace.sample(r1).hits.code()] += 1;
    b[walk.sample(r2).hits.code()] += 1;
  }
  EXPECT_GT(chi_square_two_sample(a, b).p_value, 1e-3);
}

TEST(Sampler, NaiveOracleAgreesOnDistantPair) {
  const std::int64_t r = 10;
  const auto eq = equilibrium(PointSet(3, {LatticePoint{0, 0, 0}, LatticePoint{r, 0, 0}}),
                              table3());
  const auto walk = make_sampler(SamplerKind::walk, eq, table3());
  RngStream r1(4, 0), r2(4, 1);
  const int n = 10000;
  double both_walk = 0, both_naive = 0;
  for (int i = 0; i < n; ++i) {
    both_walk += walk->sample(r1).hits.count() == 2;
    both_naive += oracle::naive_hitset(eq, table3(), r2, 3e-3).count() == 2;
  }
  const double p = both_walk / n;
  const double sigma = std::sqrt(2.0 * p * (1.0 - p) / n);
  EXPECT_NEAR(both_naive / n, p, 3 * sigma + 3e-3);
}

TEST(Sampler, StepLimitIsReported) {
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;1,0,0"), table3());
  SamplerConfig cfg;
  cfg.max_steps_per_trajectory = 3;
  HTransformSampler walk(eq, table3(), cfg);
  auto batch = run_replicas(50, 1, [&](std::size_t i) {
    RngStream rng(5, i);
    return walk.sample(rng).hits.count();
  });
  EXPECT_EQ(batch.dropped + batch.results.size(), 50u);
  EXPECT_GT(batch.dropped, 0u);
  SamplerConfig bad;
  bad.shell_radius_pad = 0;
  EXPECT_THROW(HTransformSampler(eq, table3(), bad), ConfigError);
}

TEST(Vacancy, LevelZeroLeavesEverythingVacant) {
  const auto eq = equilibrium(box_set(3, 2, 3), table3());
  TraceChainSampler s(eq, table3());
  RngStream rng(6, 0);
  EXPECT_EQ(sample_vacant(s, 0.0, rng).count(), 8u);
  EXPECT_THROW(sample_vacant(s, -0.5, rng), ConfigError);
}

TEST(Vacancy, SingletonAndPairLaws) {
  auto &t = table3();
  const int n = 100000;
  {
    const auto eq = equilibrium(parse_point_set(3, "0,0,0"), t);
    TraceChainSampler s(eq, t);
    RngStream rng(7, 0);
    double v = 0;
    for (int i = 0; i < n; ++i) v += sample_vacant(s, 1.0, rng).count() == 1;
    EXPECT_LT(std::fabs(zscore(v, n, std::exp(-1.0 / t.g0()))), 3.0);
  }
  {
    const auto eq = equilibrium(parse_point_set(3, "0,0,0;5,0,0"), t);
    const auto walk = make_sampler(SamplerKind::walk, eq, t);
    RngStream rng(7, 1);
    double v = 0;
    const int m = 20000;
    for (int i = 0; i < m; ++i) v += sample_vacant(*walk, 1.0, rng).count() == 2;
    EXPECT_LT(std::fabs(zscore(v, m, std::exp(-2.0 / (t.g0() + t(LatticePoint{5, 0, 0}))))),
              3.0);
  }
}

TEST(Vacancy, RaisingTheLevelOnlyShrinks) {
  const auto eq = equilibrium(box_set(3, 3, 3), table3());
  TraceChainSampler s(eq, table3());
  RngStream rng(8, 0);
  HitScratch scratch;
  for (int i = 0; i < 200; ++i) {
    IndexSet low = sample_vacant(s, 0.5, rng, scratch);
    IndexSet high = low;
    high &= sample_vacant(s, 0.5, rng, scratch);
    EXPECT_TRUE(high.is_subset_of(low));
  }
}

TEST(Cover, SingletonLevelIsExponential) {
  auto &t = table3();
  const auto eq = equilibrium(parse_point_set(3, "0,0,0"), t);
  TraceChainSampler s(eq, t);
  RngStream rng(9, 0);
  std::vector<double> u;
  for (int i = 0; i < 10000; ++i) {
    const auto c = sample_cover_levels(s, rng);
    EXPECT_EQ(c.cover_level, c.levels[0]);
    u.push_back(c.cover_level);
  }
  const auto mv = mean_var(u);
  EXPECT_NEAR(mv.mean, t.g0(), 3 * mv.stderr_);
  const double ks = ks_distance(EmpiricalCdf(u), [&](double x) {
    return x <= 0 ? 0.0 : 1.0 - std::exp(-x / t.g0());
  });
  EXPECT_LE(ks, 1.63 / std::sqrt(10000.0));
}

TEST(Cover, CoverLevelIsMaxOfLevels) {
  const auto eq = equilibrium(box_set(3, 4, 2), table3());
  TraceChainSampler s(eq, table3());
  RngStream rng(10, 0);
  for (int i = 0; i < 100; ++i) {
    const auto c = sample_cover_levels(s, rng);
    double mx = 0.0;
    for (double v : c.levels) {
      EXPECT_GT(v, 0.0);
      mx = std::max(mx, v);
    }
    EXPECT_EQ(mx, c.cover_level);
    EXPECT_EQ(c.levels[c.last_covered], c.cover_level);
  }
}

TEST(Cover, RestrictionToSubsetIsConsistent) {
  // Levels of a subset read off the superset's realisation have the law of
  // the subset's own cover levels, and never exceed the superset's M.
  auto &t = table3();
  const PointSet big = parse_point_set(3, "0,0,0;3,0,0;0,3,0");
  const PointSet small = parse_point_set(3, "0,0,0;3,0,0");
  TraceChainSampler sb(equilibrium(big, t), t), ss(equilibrium(small, t), t);
  RngStream r1(11, 0), r2(11, 1);
  const int n = 20000;
  std::vector<double> via_big, direct;
  for (int i = 0; i < n; ++i) {
    const auto c = sample_cover_levels(sb, r1);
    const double m = std::max(c.levels[0], c.levels[1]);
    EXPECT_LE(m, c.cover_level);
    via_big.push_back(m);
    direct.push_back(sample_cover_levels(ss, r2).cover_level);
  }
  const auto a = mean_var(via_big), b = mean_var(direct);
  EXPECT_NEAR(a.mean, b.mean, 3 * std::hypot(a.stderr_, b.stderr_));
}

TEST(Uncovered, MeanIsPowerOfSize) {
  auto &t = table3();
  const PointSet a = box_set(3, 8, 3);
  TraceChainSampler s(equilibrium(a, t), t);
  std::vector<double> sizes;
  HitScratch scratch;
  for (std::size_t i = 0; i < 4000; ++i) {
    RngStream rng(12, i);
    sizes.push_back(static_cast<double>(uncovered_set(s, 0.3, rng, scratch).count()));
  }
  const auto mv = mean_var(sizes);
  EXPECT_NEAR(mv.mean, std::pow(512.0, 0.3), 3 * mv.stderr_);
  RngStream rng(12, 99999);
  EXPECT_GT(uncovered_set(s, 0.999, rng).count(), 490u);
  EXPECT_THROW(uncovered_set(s, 1.0, rng), ConfigError);
}

TEST(GoodSet, ThresholdsAndEdgeCases) {
  EXPECT_NEAR(good_set_separation(1024, 0.1, 3), 32.0, 1e-9);
  const std::vector<LatticePoint> none;
  EXPECT_FALSE(good_set_check(none, 1024, 3, 0.1));
  EXPECT_TRUE(good_set_check({LatticePoint{0, 0, 0}}, 1024, 3, 0.1));
  const LatticePoint a{0, 0, 0}, b{32, 0, 0}, c{64, 0, 0}, d{96, 0, 0}, e{31, 0, 0};
  EXPECT_TRUE(good_set_check({a, b, c}, 1024, 3, 0.1));
  EXPECT_FALSE(good_set_check({a, b, c, d}, 1024, 3, 0.1));
  EXPECT_FALSE(good_set_check({a, e}, 1024, 3, 0.1));
  const PointSet big = box_set(3, 4, 3);
  EXPECT_THROW(good_set_check(parse_point_set(3, "9,9,9"), big, 0.1), ConfigError);
}

TEST(Increment, ExactLawIsADistribution) {
  const auto law = exact_vacant_law(parse_point_set(3, "0,0,0;2,0,0;0,1,1"), 0.7, table3());
  double total = 0.0;
  for (double p : law) total += p;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(law[7], std::exp(-0.7 * capacity(parse_point_set(3, "0,0,0;2,0,0;0,1,1"),
                                                table3())),
              1e-12);
}

TEST(Increment, TwoWaysAgree) {
  auto &t = table3();
  TraceChainSampler s(equilibrium(parse_point_set(3, "0,0,0;3,0,0"), t), t);
  const auto rep = increment_consistency_test(s, 0.5, 1.0, 100000, 13, t);
  EXPECT_TRUE(rep.pass());
  EXPECT_GT(rep.gof_direct.p_value, 1e-3);
  EXPECT_GT(rep.gof_incremental.p_value, 1e-3);
  const auto same = increment_consistency_test(s, 1.0, 1.0, 2000, 13, t);
  EXPECT_TRUE(same.pass());
  EXPECT_THROW(increment_consistency_test(s, 1.0, 0.5, 10, 13, t), ConfigError);
}

TEST(Decoupling, SingletonsMatchExactCovariance) {
  auto &t = table3();
  const PointSet one = parse_point_set(3, "0,0,0");
  const auto rows = decoupling_test(one, one, 1.0, {2, 8}, 40000, 14, t);
  for (const auto &r : rows) {
    const double exact = pair_covariance(LatticePoint{0, 0, 0}, LatticePoint{r.r, 0, 0}, 1.0, t);
    EXPECT_NEAR(r.exact_cov, exact, 1e-12);
    EXPECT_NEAR(r.delta, std::fabs(exact), 3 * r.delta_stderr);
    EXPECT_DOUBLE_EQ(r.distance, static_cast<double>(r.r));
  }
  EXPECT_THROW(decoupling_test(one, parse_point_set(3, "0,0,0;1,0,0"), 1.0, {0}, 10, 1, t),
               ConfigError);
}
