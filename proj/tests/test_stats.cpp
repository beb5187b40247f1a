#include <cmath>
#include <functional>
#include <vector>

#include <gtest/gtest.h>

#include "interlace/stats.hpp"

using namespace interlace;

TEST(Gumbel, Values) {
  EXPECT_NEAR(gumbel_cdf(0.0), 0.36787944117144233, 1e-15);
  EXPECT_NEAR(gumbel_cdf(-std::log(std::log(2.0))), 0.5, 1e-15);
  EXPECT_NEAR(gumbel_cdf(40.0), 1.0, 1e-15);
  EXPECT_NEAR(gumbel_cdf(-5.0), 0.0, 1e-60);
  EXPECT_LT(gumbel_cdf(0.1), gumbel_cdf(0.2));
}

TEST(Rescale, RoundTrip) {
  const double g0 = 1.516386059151978;
  EXPECT_NEAR(rescale_cover_level(g0 * std::log(50.0), 50, g0), 0.0, 1e-14);
  EXPECT_NEAR(rescale_cover_level(g0 * (std::log(50.0) + 1.0), 50, g0), 1.0, 1e-14);
  for (double z : {-2.0, 0.0, 3.0})
    EXPECT_NEAR(rescale_cover_level(cover_level_at(z, 777, g0), 777, g0), z, 1e-13);
  EXPECT_THROW(rescale_cover_level(1.0, 0, g0), ConfigError);
  EXPECT_THROW(rescale_cover_level(1.0, 3, 0.0), ConfigError);
}

TEST(Ks, SingleSampleAtMedian) {
  const EmpiricalCdf cdf({0.0});
  EXPECT_DOUBLE_EQ(ks_distance(cdf, [](double x) { return x < 0 ? 0.0 : (x == 0 ? 0.5 : 1.0); }),
                   0.5);
  EXPECT_THROW(EmpiricalCdf({}), ConfigError);
}

TEST(Ks, DegenerateMassPoints) {
  // Target puts mass 1/n on each sample value: KS is at most 1/n.
  const std::size_t n = 50;
  std::vector<double> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(static_cast<double>(i));
  const EmpiricalCdf cdf(s);
  const double ks = ks_distance(cdf, [&](double x) {
    return std::clamp(std::floor(x + 1.0) / static_cast<double>(n), 0.0, 1.0);
  });
  EXPECT_LE(ks, 1.0 / n + 1e-15);
}

TEST(Ks, SamplesFromTargetPassAtOnePercent) {
  RngStream rng(1, 0);
  const std::size_t n = 10000;
  int failures = 0;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(rng.exponential(1.0));
    const double ks = ks_distance(EmpiricalCdf(s), [](double x) {
      return x <= 0 ? 0.0 : 1.0 - std::exp(-x);
    });
    failures += ks > 1.63 / std::sqrt(static_cast<double>(n));
  }
  EXPECT_LE(failures, 2);
  EXPECT_NEAR(dkw_band(n, 0.01), 1.6276 / 100.0, 1e-5);
}

TEST(Ks, InvariantUnderIncreasingTransforms) {
  RngStream rng(2, 0);
  std::vector<double> s;
  for (int i = 0; i < 2000; ++i) s.push_back(rng.uniform());
  const std::function<double(double)> target = [](double x) { return std::clamp(x, 0.0, 1.0); };
  const double base = ks_distance(EmpiricalCdf(s), target);
  const std::vector<std::pair<std::function<double(double)>, std::function<double(double)>>>
      transforms{{[](double x) { return std::exp(x); }, [](double y) { return std::log(y); }},
                 {[](double x) { return x * x * x; }, [](double y) { return std::cbrt(y); }},
                 {[](double x) { return 3.0 * x - 7.0; }, [](double y) { return (y + 7.0) / 3.0; }},
                 {[](double x) { return std::tan(x); }, [](double y) { return std::atan(y); }},
                 {[](double x) { return -std::log1p(-x); },
                  [](double y) { return -std::expm1(-y); }}};
  for (const auto &[f, finv] : transforms) {
    std::vector<double> t;
    for (double x : s) t.push_back(f(x));
    EXPECT_NEAR(ks_distance(EmpiricalCdf(t), [&](double y) { return target(finv(y)); }), base,
                1e-12);
  }
}

TEST(ChiSquare, KnownQuantile) {
  EXPECT_NEAR(chi_square_sf(3.841458820694124, 1.0), 0.05, 1e-9);
  const auto r = chi_square_gof({50, 50}, {0.5, 0.5}, 100);
  EXPECT_DOUBLE_EQ(r.statistic, 0.0);
  EXPECT_DOUBLE_EQ(r.p_value, 1.0);
}

TEST(Window, SyntheticPoissonDispersion) {
  // Independent sites with a small vacancy probability give counts that
  // are Binomial(n, p), with dispersion 1 - p.
  const BoxWindow w{2, 32, 0.0};
  const PointSet box = w.sites(3);
  const double p = 1.0 / static_cast<double>(box.size());
  RngStream rng(3, 0);
  std::vector<IndexSet> reps;
  for (int r = 0; r < 10000; ++r) {
    IndexSet v(box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
      if (rng.uniform() < p) v.set(i);
    reps.push_back(v);
  }
  Rectangle all{{0.0, 0.0}, {1.0, 1.0}}, left{{0.0, 0.0}, {0.5, 1.0}}, right{{0.5, 0.0}, {1.0, 1.0}};
  const auto rep = poisson_window_test(reps, box, w, {all, left, right}, {{1, 2}});
  EXPECT_EQ(rep.rects[0].sites, box.size());
  EXPECT_EQ(rep.rects[1].sites, box.size() / 2);
  EXPECT_NEAR(rep.rects[0].dispersion, 1.0, 0.05);
  EXPECT_NEAR(rep.rects[0].mean, 1.0, 3 * rep.rects[0].mean_stderr);
  EXPECT_DOUBLE_EQ(rep.rects[0].expected_mean, 1.0);
  EXPECT_NEAR(rep.rects[0].empty_freq, rep.rects[0].empty_independent,
              3 * rep.rects[0].empty_stderr);
  EXPECT_NEAR(rep.rects[1].empty_limit, std::exp(-0.5), 1e-15);
  EXPECT_NEAR(rep.pairs[0].correlation, 0.0, 3 * rep.pairs[0].stderr_);
}

TEST(Window, RectangleEdges) {
  Rectangle r{{0.0, 0.0}, {0.5, 1.0}};
  EXPECT_TRUE(r.contains_scaled(LatticePoint{3, 7, 0}, 8));
  EXPECT_FALSE(r.contains_scaled(LatticePoint{4, 0, 0}, 8));
  EXPECT_DOUBLE_EQ(r.volume(), 0.5);
}

TEST(Separation, LargeAndTinyThresholds) {
  auto set = std::make_shared<const PointSet>(box_set(3, 4, 2));
  std::vector<CoverResult> reps;
  RngStream rng(4, 0);
  for (int r = 0; r < 30; ++r) {
    CoverResult c;
    c.set = set;
    for (std::size_t i = 0; i < set->size(); ++i) c.levels.push_back(rng.exponential(1.0));
    reps.push_back(c);
  }
  EXPECT_DOUBLE_EQ(separation_statistic(reps, 3, std::sqrt(3.0), 4).p, 1.0);
  EXPECT_DOUBLE_EQ(separation_statistic(reps, 2, 0.2, 4).p, 0.0);
  EXPECT_THROW(separation_statistic(reps, 1, 0.5, 4), ConfigError);
}

TEST(Separation, TiesBreakLexicographically) {
  auto set = std::make_shared<const PointSet>(parse_point_set(3, "5,0,0;1,0,0;3,0,0"));
  CoverResult c;
  c.set = set;
  c.levels = {2.0, 2.0, 1.0};
  const auto last = last_covered(c, 2);
  EXPECT_EQ(last, (std::vector<std::size_t>{1, 0}));
}
