#include <cmath>
#include <sstream>
#include <vector>

#include <gsl/gsl_sf_bessel.h>
#include <gtest/gtest.h>

#include "interlace/bessel.hpp"
#include "interlace/greens.hpp"

using namespace interlace;

TEST(Bessel, MatchesGsl) {
  for (int n : {0, 1, 2, 5, 13, 40}) {
    for (double z : {1e-3, 0.1, 1.0, 7.5, 39.0, 41.0, 150.0, 900.0, 7000.0}) {
      const double ref = gsl_sf_bessel_In_scaled(n, z);
      if (ref < 1e-250) continue;
      EXPECT_NEAR(bessel::scaled_i(n, z) / ref, 1.0, 1e-11) << n << " " << z;
    }
  }
}

TEST(Bessel, MillerAgreesWithHankelAtTheSwitch) {
  for (int n : {0, 1, 3, 6}) {
    const double z = bessel::hankel_threshold(n) * 1.01;
    std::vector<double> buf(static_cast<std::size_t>(n) + 1);
    bessel::scaled_i_miller(z, buf);
    EXPECT_NEAR(buf.back() / bessel::scaled_i_hankel(n, z), 1.0, 1e-12);
  }
}

TEST(Greens, KnownValues) {
  GreenTable t3(3), t4(4), t5(5);
  EXPECT_NEAR(t3.g0(), 1.516386059151978, 1e-9);
  EXPECT_NEAR(t4.g0(), 1.239467121848482, 1e-9);
  EXPECT_NEAR(t5.g0(), 1.156308124840231, 1e-9);
  EXPECT_NEAR(t3(LatticePoint{2, 0, 0}), 0.2573358872542, 1e-9);
  EXPECT_NEAR(t3(LatticePoint{4, 0, 0}), 0.1217332036518, 1e-9);
  EXPECT_NEAR(t3(LatticePoint{64, 0, 0}), 7.460843623537e-3, 1e-9);
  EXPECT_NEAR(t3(LatticePoint{128, 0, 0}), 3.730250906951e-3, 1e-9);
}

TEST(Greens, FirstStepIdentity) {
  for (int d : {3, 4, 5, 6}) {
    GreenTable t(d);
    EXPECT_NEAR(t.g0() - 1.0 - t(LatticePoint::unit(d, 0)), 0.0, 1e-9) << d;
  }
}

TEST(Greens, HarmonicOffTheOrigin) {
  GreenTable t(3);
  for (auto x : {LatticePoint{1, 1, 0}, LatticePoint{3, 2, 1}, LatticePoint{10, 0, 0},
                 LatticePoint{7, 7, 7}, LatticePoint{40, 3, 1}}) {
    double avg = 0.0;
    for (const auto &y : neighbors(x)) avg += t(y);
    EXPECT_NEAR(avg / 6.0, t(x), 1e-9) << x.to_string();
  }
}

TEST(Greens, SymmetricUnderSignsAndPermutations) {
  GreenTable t(4);
  EXPECT_EQ(t(LatticePoint{1, -2, 3, 0}), t(LatticePoint{-3, 0, 2, 1}));
  EXPECT_THROW(t(LatticePoint{1, 2, 3}), ConfigError);
}

TEST(Greens, AsymptoticRegionIsContinuous) {
  GreenTable t(3);
  const double r = std::ceil(t.asymptotic_radius());
  const auto in = GreenKey::of(LatticePoint{static_cast<std::int64_t>(r) - 1, 0, 0});
  const double inside = detail::green_bessel_integral(in, 1e-9);
  const double outside = t(LatticePoint{static_cast<std::int64_t>(r) - 1, 0, 0});
  EXPECT_NEAR(inside, detail::green_asymptotic_constant(3) / (r - 1), 1e-9);
  EXPECT_NEAR(inside, outside, 1e-9);
}

TEST(Greens, DecaysLikeThePowerLaw) {
  for (int d : {3, 4, 5}) {
    GreenTable t(d);
    double lo = 1e300, hi = 0.0;
    for (std::int64_t r : {1, 2, 3, 5, 8, 13, 30, 60, 120}) {
      for (const auto &c : {std::vector<std::int64_t>{r, 0}, std::vector<std::int64_t>{r, r}}) {
        std::vector<std::int64_t> x(static_cast<std::size_t>(d), 0);
        x[0] = c[0];
        x[1] = c[1];
        const LatticePoint p(x);
        const double ratio = t(p) * std::pow(p.norm(), d - 2.0);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
      }
    }
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 2.0) << "d=" << d;
  }
}

TEST(Greens, RejectsBadTolerance) {
  EXPECT_THROW(GreenTable(3, 0.0), ConfigError);
  EXPECT_THROW(GreenTable(3, 1e-2), ConfigError);
  EXPECT_THROW(GreenTable(2), ConfigError);
}

TEST(Greens, CacheRoundTrip) {
  GreenTable t(3);
  t(LatticePoint{3, 1, 0});
  t(LatticePoint{0, 0, 5});
  std::stringstream ss;
  t.save(ss);
  const std::string text = ss.str();
  GreenTable back = GreenTable::load(ss);
  EXPECT_EQ(back.cache_size(), t.cache_size());
  EXPECT_EQ(back(LatticePoint{1, 3, 0}), t(LatticePoint{3, 1, 0}));
  std::stringstream again;
  back.save(again);
  EXPECT_EQ(again.str(), text);

  std::stringstream bad("greens v2 d=3 tol=1e-9\n");
  EXPECT_THROW(GreenTable::load(bad), ConfigError);
  std::stringstream unsorted("greens v1 d=3 tol=1e-09\n3 1 0 0.1\n");
  EXPECT_THROW(GreenTable::load(unsorted), ConfigError);
}

TEST(Greens, MonteCarloOracleAtOrigin) {
  RngStream rng(11, 0);
  const auto mc = green_mc(3, LatticePoint{0, 0, 0}, 4000, 4000, rng);
  GreenTable t(3);
  EXPECT_NEAR(mc.estimate + mc.tail_bias, t.g0(), 3 * mc.stderr_ + 0.1 * mc.tail_bias);
}

TEST(Greens, TailBiasShrinksWithHorizon) {
  EXPECT_GT(green_mc_tail_bias(3, 1000), green_mc_tail_bias(3, 4000));
  EXPECT_NEAR(green_mc_tail_bias(3, 10000), 0.0066, 2e-4);
}
