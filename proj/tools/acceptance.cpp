#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "interlace/consistency.hpp"
#include "interlace/experiments.hpp"
#include "interlace/greens.hpp"
#include "interlace/interlacement.hpp"
#include "interlace/parallel.hpp"
#include "interlace/potential.hpp"
#include "interlace/stats.hpp"

using namespace interlace;

namespace {

unsigned g_workers = 1;

struct Outcome {
  bool pass = true;
  std::string summary;
};

void note(const std::string &s) { std::cout << "    " << s << "\n"; }

std::string fmt(double v, int prec = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

// Mean visits to x over n walks of the given horizon, split into chunks
// with their own streams so the result does not depend on the worker count.
McEstimate chunked_green_mc(int d, const LatticePoint &x, std::uint64_t n,
                            std::uint64_t horizon, std::uint64_t seed) {
  constexpr std::uint64_t kChunks = 50;
  auto parts = parallel_map(kChunks, g_workers, [&](std::size_t c) {
    RngStream rng(seed, c);
    return green_mc(d, x, n / kChunks, horizon, rng);
  });
  const double m = static_cast<double>(n / kChunks);
  double mean = 0.0, ss = 0.0;
  for (const auto &p : parts) mean += p.estimate;
  mean /= kChunks;
  for (const auto &p : parts) {
    const double var = p.stderr_ * p.stderr_ * m;  // per-walk variance
    ss += (m - 1.0) * var + m * (p.estimate - mean) * (p.estimate - mean);
  }
  McEstimate out;
  out.estimate = mean;
  out.samples = kChunks * (n / kChunks);
  out.stderr_ = std::sqrt(ss / (static_cast<double>(out.samples) - 1.0) /
                          static_cast<double>(out.samples));
  out.tail_bias = green_mc_tail_bias(d, horizon);
  return out;
}

Proportion vacancy_frequency(const HitSetSampler &s, double u, std::size_t reps,
                             std::uint64_t seed) {
  auto batch = run_replicas(reps, g_workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_vacant(s, u, rng).count() == s.size();
  });
  std::uint64_t hits = 0;
  for (bool b : batch.results) hits += b;
  return proportion(hits, batch.results.size());
}

std::vector<CoverResult> cover_batch(const HitSetSampler &s, std::size_t reps,
                                     std::uint64_t seed) {
  auto batch = run_replicas(reps, g_workers, [&](std::size_t i) {
    RngStream rng(seed, i);
    return sample_cover_levels(s, rng);
  });
  if (batch.dropped > 0) throw std::runtime_error("replicas dropped");
  return std::move(batch.results);
}

double gumbel_ks(const std::vector<CoverResult> &reps, double g0) {
  std::vector<double> z;
  for (const auto &r : reps)
    z.push_back(rescale_cover_level(r.cover_level, r.levels.size(), g0));
  return ks_distance(EmpiricalCdf(z), gumbel_cdf);
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  Outcome o;
  double worst_identity = 0.0, worst_harm = 0.0;
  const std::vector<LatticePoint> base{
      {1, 0, 0}, {1, 1, 0}, {1, 1, 1}, {2, 0, 0}, {2, 1, 0},
      {3, 2, 1}, {5, 0, 0}, {4, 4, 4}, {10, 3, 0}, {25, 7, 2}};
  for (int d : {3, 4, 5}) {
    GreenTable t(d);
    const double id = std::fabs(t.g0() - 1.0 - t(LatticePoint::unit(d, 0)));
    worst_identity = std::max(worst_identity, id);
    for (const auto &b : base) {
      LatticePoint x(d);
      for (int i = 0; i < 3; ++i) x[i] = b[i];
      double avg = 0.0;
      for (const auto &y : neighbors(x)) avg += t(y);
      worst_harm = std::max(worst_harm, std::fabs(avg / (2.0 * d) - t(x)));
    }
    note("d=" + std::to_string(d) + " g(0)=" + fmt(t.g0(), 16) +
         " |g(0)-1-g(e1)|=" + fmt(id, 3));
  }
  note("max harmonicity residual over 30 offsets: " + fmt(worst_harm, 3));
  o.pass = worst_identity <= 1e-8 && worst_harm <= 1e-8;

  GreenTable t(3);
  const std::vector<LatticePoint> probes{{0, 0, 0}, {1, 0, 0}, {1, 1, 0},
                                         {1, 1, 1}, {2, 0, 0}, {2, 1, 1}};
  const std::uint64_t n = 50000, horizon = 10000;
  int inside = 0;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const auto mc = chunked_green_mc(3, probes[i], n, horizon, 100 + i);
    // Visits after the horizon are added back from the local CLT; its
    // error is O(horizon^{-3/2}), far below the standard error.
    const double est = mc.estimate + mc.tail_bias;
    const double z = (est - t(probes[i])) / mc.stderr_;
    inside += std::fabs(z) <= 3.0;
    note("MC g(" + probes[i].to_string() + ") = " + fmt(est, 7) + " +- " +
         fmt(mc.stderr_, 2) + " vs " + fmt(t(probes[i]), 10) + " (z=" + fmt(z, 3) + ")");
  }
  o.pass = o.pass && inside == static_cast<int>(probes.size());
  o.summary = "Green identities: |g0-1-g(e1)| max " + fmt(worst_identity, 2) +
              ", harmonicity max " + fmt(worst_harm, 2) + ", MC probes within 3 sigma " +
              std::to_string(inside) + "/6";
  return o;
}

Outcome criterion2() {
  Outcome o;
  GreenTable t(3);
  double worst = 0.0;
  for (const auto &x : {LatticePoint{0, 0, 0}, LatticePoint{7, -3, 2}})
    worst = std::max(worst, std::fabs(capacity(PointSet(3, {x}), t) - 1.0 / t.g0()));
  for (const auto &y : {LatticePoint{1, 0, 0}, LatticePoint{2, 1, 0}, LatticePoint{5, 0, 0},
                        LatticePoint{20, 3, 1}, LatticePoint{64, 0, 0}}) {
    const double exact = 2.0 / (t.g0() + t(y));
    worst = std::max(worst, std::fabs(capacity(PointSet(3, {LatticePoint{0, 0, 0}, y}), t) - exact));
  }
  note("closed-form capacity error max " + fmt(worst, 3));

  RngStream rng(200, 0);
  int ordered = 0;
  auto random_set = [&](std::size_t n) {
    PointSet s(3);
    while (s.size() < n) {
      LatticePoint p(3);
      for (int i = 0; i < 3; ++i) p[i] = static_cast<std::int64_t>(rng.below(10));
      s.insert(p);
    }
    return s;
  };
  for (int trial = 0; trial < 50; ++trial) {
    const PointSet a = random_set(1 + rng.below(8)), b = random_set(1 + rng.below(8));
    PointSet u = a;
    for (const auto &p : b) u.insert(p);
    const double ca = capacity(a, t), cb = capacity(b, t), cu = capacity(u, t);
    ordered += cu >= std::max(ca, cb) - 1e-12 && cu <= ca + cb + 1e-12;
  }
  note("monotone and subadditive on " + std::to_string(ordered) + "/50 random pairs");

  const std::vector<std::string> sets{"0,0,0;1,0,0", "0,0,0;3,0,0;0,2,1",
                                      "0,0,0;1,0,0;0,1,0;1,1,0", "0,0,0;6,0,0;0,6,0;0,0,6",
                                      "0,0,0;1,1,0;2,2,0;3,3,1;5,0,2"};
  int agree = 0;
  for (std::size_t s = 0; s < sets.size(); ++s) {
    const auto eq = equilibrium(parse_point_set(3, sets[s]), t);
    const double radius = set_metrics(eq.set).diameter + 12.0;
    auto parts = parallel_map(eq.set.size(), g_workers, [&](std::size_t i) {
      RngStream r(210 + s, i);
      return escape_mc(eq.set[i], eq, 40000, radius, r, t);
    });
    double est = 0.0, var = 0.0;
    for (const auto &p : parts) {
      est += p.estimate;
      var += p.stderr_ * p.stderr_;
    }
    const double z = (est - eq.capacity) / std::sqrt(var);
    agree += std::fabs(z) <= 3.0;
    note("set " + std::to_string(s) + ": cap " + fmt(eq.capacity, 8) + ", escape MC " +
         fmt(est, 6) + " (z=" + fmt(z, 3) + ")");
  }
  o.pass = worst <= 1e-9 && ordered == 50 && agree == 5;
  o.summary = "potential closed forms: error " + fmt(worst, 2) + ", order checks " +
              std::to_string(ordered) + "/50, escape MC " + std::to_string(agree) + "/5";
  return o;
}

Outcome criterion3() {
  Outcome o;
  GreenTable t(3);
  const std::vector<std::pair<std::string, PointSet>> configs{
      {"singleton", parse_point_set(3, "0,0,0")},
      {"pair r=2", parse_point_set(3, "0,0,0;2,0,0")},
      {"pair r=5", parse_point_set(3, "0,0,0;5,0,0")},
      {"pair r=20", parse_point_set(3, "0,0,0;20,0,0")},
      {"3-point", parse_point_set(3, "0,0,0;2,1,0;0,3,1")},
      {"2x2x2 box", box_set(3, 2, 3)}};
  int inside = 0, total = 0;
  double worst = 0.0;
  for (std::size_t c = 0; c < configs.size(); ++c) {
    const auto eq = equilibrium(configs[c].second, t);
    TraceChainSampler s(eq, t);
    std::string line = configs[c].first + ":";
    for (double u : {0.5, 1.0, 2.0}) {
      const auto p = vacancy_frequency(s, u, 100000, 300 + 10 * c + static_cast<int>(2 * u));
      const double exact = std::exp(-u * eq.capacity);
      const double z = (p.p - exact) / binomial_sigma(exact, p.n);
      worst = std::max(worst, std::fabs(z));
      inside += std::fabs(z) <= 3.0;
      ++total;
      line += " u=" + fmt(u, 2) + " " + fmt(p.p, 5) + "/" + fmt(exact, 5) + " (z=" + fmt(z, 3) + ")";
    }
    note(line);
  }
  o.pass = inside == total;
  o.summary = "vacancy anchor: " + std::to_string(inside) + "/" + std::to_string(total) +
              " within 3 sigma of exp(-u cap), max |z| " + fmt(worst, 3);
  return o;
}

Outcome criterion4() {
  Outcome o;
  GreenTable t(3);
  const LatticePoint x{0, 0, 0};
  int inside = 0;
  const std::vector<std::int64_t> rs{2, 5};
  for (std::size_t i = 0; i < rs.size(); ++i) {
    const LatticePoint y{rs[i], 0, 0};
    const auto eq = equilibrium(PointSet(3, {x, y}), t);
    // The walk sampler, independently of the trace chain used elsewhere.
    HTransformSampler s(eq, t);
    const auto p = vacancy_frequency(s, 1.0, 100000, 400 + i);
    const double exact = std::exp(-2.0 / (t.g0() + t(y)));
    const double z = (p.p - exact) / binomial_sigma(exact, p.n);
    inside += std::fabs(z) <= 3.0;
    note("r=" + std::to_string(rs[i]) + " walk sampler: both vacant " + fmt(p.p, 5) +
         " vs " + fmt(exact, 6) + " (z=" + fmt(z, 3) + ")");
  }
  const double c64 = pair_covariance(x, LatticePoint{64, 0, 0}, 1.0, t) * 64.0;
  const double c128 = pair_covariance(x, LatticePoint{128, 0, 0}, 1.0, t) * 128.0;
  const double rel = std::fabs(c64 - c128) / c128;
  note("Cov(r) r: r=64 " + fmt(c64, 8) + ", r=128 " + fmt(c128, 8) + ", relative gap " + fmt(rel, 3));
  o.pass = inside == 2 && rel <= 0.10;
  o.summary = "two-point law " + std::to_string(inside) + "/2 within 3 sigma; Cov r^{d-2} gap " +
              fmt(rel, 3) + " (limit 0.10)";
  return o;
}

Outcome criterion5() {
  Outcome o;
  GreenTable t(3);
  const PointSet a = box_set(3, 4, 3);
  TraceChainSampler s(equilibrium(a, t), t);
  const std::size_t n = 10000;
  const auto reps = cover_batch(s, n, 500);
  const double band = 1.63 / std::sqrt(static_cast<double>(n));
  auto target = [&](double u) { return u <= 0 ? 0.0 : 1.0 - std::exp(-u / t.g0()); };
  bool all = true;
  std::string worst;
  for (std::size_t idx : {std::size_t{0}, std::size_t{21}}) {
    std::vector<double> u;
    for (const auto &r : reps) u.push_back(r.levels[idx]);
    const double ks = ks_distance(EmpiricalCdf(u), target);
    const auto mv = mean_var(u);
    note("U at " + a[idx].to_string() + ": KS " + fmt(ks, 4) + " (band " + fmt(band, 4) +
         "), mean " + fmt(mv.mean, 5) + " +- " + fmt(mv.stderr_, 2) + " vs g(0) " + fmt(t.g0(), 6));
    all = all && ks <= band;
    worst += (worst.empty() ? "" : ", ") + fmt(ks, 4);
  }
  o.pass = all;
  o.summary = "exponential marginal: KS " + worst + " vs 1.63/sqrt(n) = " + fmt(band, 4);
  return o;
}

Outcome criterion6() {
  Outcome o;
  GreenTable t(3);
  const double lambda = 1.0 / 3.0;
  const std::size_t n = 256;
  const auto spacing = static_cast<std::int64_t>(
      std::ceil(std::pow(static_cast<double>(n), (2.0 + lambda) / (3.0 - 2.0))));
  note("spacing " + std::to_string(spacing));
  const std::vector<std::vector<std::int64_t>> shapes{{8, 8, 4}, {16, 16}};
  bool all = true;
  std::string parts;
  for (std::size_t g = 0; g < shapes.size(); ++g) {
    const PointSet a = grid_set(3, shapes[g], spacing);
    TraceChainSampler s(equilibrium(a, t), t);
    const auto reps = cover_batch(s, 5000, 600 + g);
    const double ks = gumbel_ks(reps, t.g0());
    const double ua = cover_level_at(0.0, n, t.g0());
    std::uint64_t below = 0;
    for (const auto &r : reps) below += r.cover_level <= ua;
    const Proportion p = proportion(below, reps.size());
    const double target = std::pow(1.0 - std::exp(-ua / t.g0()), static_cast<double>(n));
    const double gap = std::fabs(p.p - target);
    const double allowed = 3.0 * binomial_sigma(target, p.n) + 0.02;
    const bool ok = ks <= 0.05 && gap <= allowed;
    all = all && ok;
    std::string shape;
    for (auto c : shapes[g]) shape += (shape.empty() ? "" : "x") + std::to_string(c);
    note("grid " + shape + ": KS " + fmt(ks, 4) + ", P(M<=u_A(0)) " + fmt(p.p, 4) +
         " vs " + fmt(target, 5) + " (gap " + fmt(gap, 3) + ", allowed " + fmt(allowed, 3) + ")");
    parts += (parts.empty() ? "" : "; ") + shape + " KS " + fmt(ks, 3);
  }
  o.pass = all;
  o.summary = "well-separated grids (n=256): " + parts + " (limit 0.05)";
  return o;
}

Outcome criterion7() {
  Outcome o;
  GreenTable t(3);
  const std::size_t reps = 2000;
  const double sigma = ks_sigma(reps);
  std::vector<double> ks;
  for (std::int64_t side : {4, 8, 10}) {
    const PointSet a = box_set(3, side, 3);
    TraceChainSampler s(equilibrium(a, t), t);
    const auto r = cover_batch(s, reps, 700 + static_cast<std::uint64_t>(side));
    ks.push_back(gumbel_ks(r, t.g0()));
    note("|A|=" + std::to_string(a.size()) + ": KS(rescaled M, Gumbel) " + fmt(ks.back(), 4));
  }
  bool trend = true;
  for (std::size_t i = 1; i < ks.size(); ++i)
    trend = trend && ks[i] <= ks[i - 1] + 3.0 * std::sqrt(2.0) * sigma;
  o.pass = trend && ks.back() <= 0.10;
  o.summary = "dense boxes: KS " + fmt(ks[0], 3) + ", " + fmt(ks[1], 3) + ", " + fmt(ks[2], 3) +
              (trend ? " non-increasing" : " not non-increasing") + " within 3 sigma; " +
              "last vs limit 0.10";
  return o;
}

Outcome criterion8() {
  Outcome o;
  GreenTable t(3);
  const double eps = 0.3;
  const PointSet a = box_set(3, 16, 3);
  const auto eq = equilibrium(a, t);
  TraceChainSampler s(eq, t);
  struct Rep {
    double size;
    bool good;
  };
  auto batch = run_replicas(10000, g_workers, [&](std::size_t i) {
    RngStream rng(800, i);
    const IndexSet v = uncovered_set(s, eps, rng);
    return Rep{static_cast<double>(v.count()), good_set_check(v, a, eps)};
  });
  std::vector<double> sizes;
  std::uint64_t good = 0;
  for (const auto &r : batch.results) {
    sizes.push_back(r.size);
    good += r.good;
  }
  const auto mv = mean_var(sizes);
  const double n = static_cast<double>(a.size());
  const double exact_mean = std::pow(n, eps);
  const double u = uncovered_level(t.g0(), a.size(), eps);
  const double exact_var = detail::exact_uncovered_variance(a, u, t);
  const double z = (mv.mean - exact_mean) / mv.stderr_;
  const double var_rel = std::fabs(mv.var - exact_var) / exact_var;
  const Proportion pg = proportion(good, sizes.size());
  note("E|A_eps| " + fmt(mv.mean, 5) + " +- " + fmt(mv.stderr_, 2) + " vs " + fmt(exact_mean, 6) +
       " (z=" + fmt(z, 3) + ")");
  note("Var|A_eps| " + fmt(mv.var, 5) + " vs exact pair sum " + fmt(exact_var, 6) +
       " (relative gap " + fmt(var_rel, 3) + ")");
  note("good event frequency " + fmt(pg.p, 4) + "; separation needed " +
       fmt(good_set_separation(a.size(), eps, 3), 4) + ", box diameter " +
       fmt(set_metrics(a).diameter, 4) + ", size window " + fmt(exact_mean, 4) + " +- " +
       fmt(std::pow(n, 2.0 * eps / 3.0), 4));
  const bool mean_ok = std::fabs(z) <= 3.0, var_ok = var_rel <= 0.30, good_ok = pg.p >= 0.8;
  o.pass = mean_ok && var_ok && good_ok;
  o.summary = std::string("uncovered set: mean ") + (mean_ok ? "ok" : "off") + " (z=" +
              fmt(z, 3) + "), variance " + (var_ok ? "ok" : "off") + " (gap " + fmt(var_rel, 3) +
              "), good-event frequency " + fmt(pg.p, 3) + " (needs >= 0.8)";
  return o;
}

Outcome criterion9() {
  Outcome o;
  GreenTable t(3);
  const BoxWindow w{2, 32, 0.0};
  const PointSet box = w.sites(3);
  const auto rects = parse_rects("", 2);
  const double u = cover_level_at(w.z, box.size(), t.g0());
  TraceChainSampler s(equilibrium(box, t), t);
  auto batch = run_replicas(10000, g_workers, [&](std::size_t i) {
    RngStream rng(900, i);
    return sample_vacant(s, u, rng);
  });
  const auto rep = poisson_window_test(batch.results, box, w, rects, {{1, 2}});
  bool means = true, disp = true, empty = true;
  for (std::size_t r = 0; r < rects.size(); ++r) {
    const auto &x = rep.rects[r];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < box.size(); ++i)
      if (rects[r].contains_scaled(box[i], w.side)) idx.push_back(i);
    const double exact_disp = exact_vacant_dispersion(box.subset(idx), u, t);
    const double zm = (x.mean - x.expected_mean) / x.mean_stderr;
    const double ze = (x.empty_freq - x.empty_independent) /
                      binomial_sigma(x.empty_independent, rep.replicas);
    means = means && std::fabs(zm) <= 3.0;
    disp = disp && std::fabs(x.dispersion - 1.0) <= 0.15;
    empty = empty && std::fabs(ze) <= 3.0;
    note("I=[" + fmt(rects[r].lo[0], 2) + "," + fmt(rects[r].hi[0], 2) + "]x[" +
         fmt(rects[r].lo[1], 2) + "," + fmt(rects[r].hi[1], 2) + "]: mean " + fmt(x.mean, 4) +
         " vs " + fmt(x.expected_mean, 4) + " (z=" + fmt(zm, 3) + "), dispersion " +
         fmt(x.dispersion, 4) + " (exact " + fmt(exact_disp, 4) + ", tolerance 0.15), empty " +
         fmt(x.empty_freq, 4) + " vs " + fmt(x.empty_independent, 4) + " (z=" + fmt(ze, 3) +
         ", limit " + fmt(x.empty_limit, 4) + ")");
  }
  note("count correlation of the two halves " + fmt(rep.pairs[0].correlation, 3) + " +- " +
       fmt(rep.pairs[0].stderr_, 2));
  o.pass = means && disp && empty;
  o.summary = std::string("Poisson window N=32: means ") + (means ? "ok" : "off") +
              ", dispersion " + (disp ? "ok" : "off") + " (whole window " +
              fmt(rep.rects[0].dispersion, 3) + "), empty frequency " + (empty ? "ok" : "off");
  return o;
}

Outcome criterion10() {
  Outcome o;
  GreenTable t(3);
  const double delta = 0.05;
  const std::size_t reps = 2000;
  std::vector<Proportion> freq;
  for (std::int64_t side : {8, 16, 32}) {
    const PointSet a = box_set(3, side, 2);
    TraceChainSampler s(equilibrium(a, t), t);
    const auto r = cover_batch(s, reps, 1000 + static_cast<std::uint64_t>(side));
    freq.push_back(separation_statistic(r, 2, delta, side));
    note("N=" + std::to_string(side) + " (delta N = " + fmt(delta * side, 3) +
         "): P(|X1-X2| <= delta N) = " + fmt(freq.back().p, 4) + " +- " +
         fmt(freq.back().stderr_, 2));
  }
  bool trend = true;
  for (std::size_t i = 1; i < freq.size(); ++i) {
    const double sigma = std::hypot(freq[i].stderr_, freq[i - 1].stderr_);
    trend = trend && freq[i].p <= freq[i - 1].p + 3.0 * sigma;
  }
  o.pass = trend;
  o.summary = "separation frequency over N=8,16,32: " + fmt(freq[0].p, 3) + ", " +
              fmt(freq[1].p, 3) + ", " + fmt(freq[2].p, 3) +
              (trend ? " (non-increasing)" : " (increases beyond 3 sigma)");
  return o;
}

Outcome criterion11() {
  Outcome o;
  GreenTable t(3);
  bool inc_ok = true;
  std::string ps;
  const std::vector<std::string> sets{"0,0,0;3,0,0", "0,0,0;1,0,0;0,2,0"};
  for (std::size_t i = 0; i < sets.size(); ++i) {
    TraceChainSampler s(equilibrium(parse_point_set(3, sets[i]), t), t);
    const auto rep = increment_consistency_test(s, 0.5, 1.0, 100000, 1100 + i, t, g_workers);
    inc_ok = inc_ok && rep.pass(0.01);
    note("increment |K|=" + std::to_string(s.size()) + ": two-sample p " +
         fmt(rep.two_sample.p_value, 3) + ", exact-law p " + fmt(rep.gof_direct.p_value, 3) +
         " / " + fmt(rep.gof_incremental.p_value, 3));
    ps += (ps.empty() ? "" : ", ") + fmt(rep.two_sample.p_value, 3);
  }
  const auto c = constants_c1_c2(3, t);
  const bool const_ok =
      std::fabs(c.c1 - 0.0089286) <= 1e-6 && std::fabs(c.c2 - 0.659463) <= 1e-6;
  note("c1 = " + fmt(c.c1, 8) + ", c2 = " + fmt(c.c2, 8));

  // Every experiment twice, with different worker counts.
  std::vector<ExperimentConfig> cfgs;
  auto add = [&](const std::string &e, auto &&tweak) {
    ExperimentConfig cfg;
    cfg.experiment = e;
    cfg.replicas = 2000;
    cfg.seed = 1111;
    tweak(cfg);
    cfgs.push_back(cfg);
  };
  add("green", [](ExperimentConfig &c) { c.point = "3,1,0"; });
  add("cap", [](ExperimentConfig &c) { c.set = "0,0,0;5,0,0"; });
  add("vacancy", [](ExperimentConfig &c) { c.set = "0,0,0;2,1,0;0,3,1"; });
  add("cover-dist", [](ExperimentConfig &c) { c.box = 6; });
  add("cover-dist", [](ExperimentConfig &c) {
    c.grid = {4, 4, 2};
    c.spacing = 416128;
  });
  add("uncovered", [](ExperimentConfig &c) { c.box = 8; });
  add("poisson-window", [](ExperimentConfig &c) {
    c.box = 16;
    c.box_l = 2;
  });
  add("separation", [](ExperimentConfig &c) {
    c.box = 16;
    c.box_l = 2;
  });
  add("decouple", [](ExperimentConfig &c) {
    c.set = "0,0,0";
    c.set2 = "0,0,0";
  });
  add("increment", [](ExperimentConfig &c) { c.set = "0,0,0;3,0,0"; });
  add("vacancy", [](ExperimentConfig &c) {
    c.set = "0,0,0;4,0,0";
    c.sampler = "walk";
    c.replicas = 500;
  });
  int same = 0;
  for (auto cfg : cfgs) {
    cfg.workers = 1;
    const auto h1 = report_hash(report_text(run_experiment(cfg)));
    cfg.workers = 2;
    const auto h2 = report_hash(report_text(run_experiment(cfg)));
    same += h1 == h2;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h1));
    note(cfg.experiment + (cfg.sampler == "walk" ? " (walk)" : "") + ": " + buf +
         (h1 == h2 ? " identical" : " DIFFERS"));
  }
  const bool det_ok = same == static_cast<int>(cfgs.size());
  o.pass = inc_ok && const_ok && det_ok;
  o.summary = "structural: increment p " + ps + (inc_ok ? " (pass)" : " (fail)") +
              ", constants " + (const_ok ? "ok" : "off") + ", replay identical " +
              std::to_string(same) + "/" + std::to_string(cfgs.size());
  return o;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> which;
  app.add_option("--criterion", which, "criteria to run (default: all)")
      ->check(CLI::Range(1, 11));
  app.add_option("--workers", g_workers, "worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);
  if (which.empty())
    for (int i = 1; i <= 11; ++i) which.push_back(i);

  const std::vector<std::function<Outcome()>> criteria{
      criterion1, criterion2, criterion3, criterion4,  criterion5, criterion6,
      criterion7, criterion8, criterion9, criterion10, criterion11};
  int failures = 0;
  for (int c : which) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[static_cast<std::size_t>(c - 1)]();
    } catch (const std::exception &e) {
      o.pass = false;
      o.summary = std::string("error: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << "criterion " << c << ": " << (o.pass ? "PASS" : "FAIL") << " : "
              << o.summary << " [" << fmt(secs, 3) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
