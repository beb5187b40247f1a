#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "interlace/io.hpp"
#include "interlace/potential.hpp"

using namespace interlace;

namespace {

GreenTable &table3() {
  static GreenTable t(3);
  return t;
}

PointSet random_set(RngStream &rng, std::size_t n, std::int64_t span) {
  PointSet s(3);
  while (s.size() < n) {
    LatticePoint p(3);
    for (int i = 0; i < 3; ++i)
      p[i] = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(span)));
    s.insert(p);
  }
  return s;
}

PointSet set_union(const PointSet &a, const PointSet &b) {
  PointSet u = a;
  for (const auto &p : b) u.insert(p);
  return u;
}

}  // namespace

TEST(Potential, ClosedForms) {
  auto &t = table3();
  EXPECT_NEAR(capacity(parse_point_set(3, "4,-1,2"), t), 1.0 / t.g0(), 1e-12);
  for (auto y : {LatticePoint{1, 0, 0}, LatticePoint{5, 0, 0}, LatticePoint{3, 3, 1}}) {
    PointSet k(3, {LatticePoint{0, 0, 0}, y});
    EXPECT_NEAR(capacity(k, t), 2.0 / (t.g0() + t(y)), 1e-12);
    EXPECT_NEAR(capacity(k, t), pair_capacity(LatticePoint{0, 0, 0}, y, t), 1e-12);
  }
}

TEST(Potential, LastExitIdentityHoldsOnK) {
  auto &t = table3();
  const auto eq = equilibrium(box_set(3, 3, 3), t);
  for (const auto &x : eq.set) {
    double h = 0.0;
    for (std::size_t i = 0; i < eq.set.size(); ++i) h += t(x - eq.set[i]) * eq.weights[i];
    EXPECT_NEAR(h, 1.0, 1e-9);
  }
  // The centre of a 3x3x3 box cannot escape without re-entering.
  EXPECT_EQ(eq.weights[13], 0.0);
  EXPECT_EQ(hitting_prob(LatticePoint{1, 1, 1}, eq, t), 1.0);
  EXPECT_LT(hitting_prob(LatticePoint{10, 1, 1}, eq, t), 1.0);
}

TEST(Potential, MonotoneAndSubadditive) {
  auto &t = table3();
  RngStream rng(8, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const PointSet a = random_set(rng, 1 + rng.below(6), 12);
    const PointSet b = random_set(rng, 1 + rng.below(6), 12);
    const PointSet u = set_union(a, b);
    const double ca = capacity(a, t), cb = capacity(b, t), cu = capacity(u, t);
    EXPECT_GE(cu, std::max(ca, cb) - 1e-12);
    EXPECT_LE(cu, ca + cb + 1e-12);
  }
}

TEST(Potential, EscapeMonteCarloAgrees) {
  auto &t = table3();
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;2,0,0;0,3,1"), t);
  RngStream rng(21, 0);
  for (std::size_t i = 0; i < eq.set.size(); ++i) {
    const auto mc = escape_mc(eq.set[i], eq, 20000, 15.0, rng, t);
    EXPECT_NEAR(mc.estimate, eq.weights[i], 3.5 * mc.stderr_ + 1e-9) << i;
  }
  EXPECT_THROW(escape_mc(eq.set[0], eq, 100, 5.0, rng, t), ConfigError);
  EXPECT_THROW(escape_mc(LatticePoint{9, 9, 9}, eq, 100, 20.0, rng, t), ConfigError);
}

TEST(Potential, VacancyAndCovariance) {
  auto &t = table3();
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;5,0,0"), t);
  const auto law = VacancyLaw::of(eq, t);
  EXPECT_DOUBLE_EQ(vacancy_prob(law, 0.0), 1.0);
  EXPECT_NEAR(vacancy_prob(law, 1.0), std::exp(-2.0 / (t.g0() + t(LatticePoint{5, 0, 0}))),
              1e-12);
  EXPECT_THROW(vacancy_prob(law, -1.0), ConfigError);
  // Covariance is positive and decreasing in the distance.
  double prev = 1.0;
  for (std::int64_t r : {1, 2, 4, 8, 16, 64, 128}) {
    const double c = pair_covariance(LatticePoint{0, 0, 0}, LatticePoint{r, 0, 0}, 1.0, t);
    EXPECT_GT(c, 0.0);
    EXPECT_LT(c, prev);
    prev = c;
  }
  EXPECT_THROW(pair_covariance(LatticePoint{0, 0, 0}, LatticePoint{0, 0, 0}, 1.0, t),
               ConfigError);
}

TEST(Potential, CoverConstants) {
  const auto c = constants_c1_c2(3, table3());
  EXPECT_NEAR(c.c1, 0.0089286, 1e-6);
  EXPECT_NEAR(c.c2, 0.659463, 1e-6);
  EXPECT_TRUE(c.geometric_branch);
}

TEST(Potential, InputErrors) {
  auto &t = table3();
  EXPECT_THROW(equilibrium(PointSet(3), t), ConfigError);
  EXPECT_THROW(equilibrium(box_set(3, 17, 3), t), ConfigError);
  EXPECT_THROW(equilibrium(parse_point_set(4, "0,0,0,0"), t), ConfigError);
}

TEST(Potential, EquilibriumJsonRoundTrip) {
  const auto eq = equilibrium(parse_point_set(3, "0,0,0;1,0,0;4,4,4"), table3());
  const auto back = equilibrium_from_json(json::parse(to_json(eq).dump()));
  EXPECT_EQ(back.set.points(), eq.set.points());
  EXPECT_EQ(back.weights, eq.weights);
  EXPECT_EQ(back.capacity, eq.capacity);
  EXPECT_THROW(equilibrium_from_json(json{{"dim", 3}}), ConfigError);
}
