#ifndef INTERLACE_EXPERIMENTS_HPP_
#define INTERLACE_EXPERIMENTS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "interlace/consistency.hpp"
#include "interlace/errors.hpp"
#include "interlace/greens.hpp"
#include "interlace/interlacement.hpp"
#include "interlace/io.hpp"
#include "interlace/lattice.hpp"
#include "interlace/parallel.hpp"
#include "interlace/potential.hpp"
#include "interlace/stats.hpp"

namespace interlace {

inline constexpr const char *kVersion = "interlace 1.0.0";

inline const std::vector<std::string> &experiment_names() {
  static const std::vector<std::string> names{
      "green",     "cap",        "vacancy",  "cover-dist", "uncovered",
      "poisson-window", "separation", "decouple", "increment"};
  return names;
}

/// One experiment invocation. Defaults < JSON config file < command line.
struct ExperimentConfig {
  std::string experiment;
  int dim = 3;
  // Geometry: exactly one of set / box / grid describes A.
  std::string set;
  std::string set2;  // second set for decouple
  std::string point;
  std::int64_t box = 0;
  int box_l = 0;  // 0 means l = dim
  std::vector<std::int64_t> grid;
  std::int64_t spacing = 1;
  std::string rects;  // "lo,..:hi,..;..." in [0,1]^l

  double u = 1.0;
  double u2 = 2.0;
  double z = 0.0;
  double eps = 0.3;
  std::size_t k = 2;
  double delta = 0.05;
  std::vector<std::int64_t> separations{8, 16, 32, 64};

  std::size_t replicas = 1000;
  std::uint64_t seed = 1;
  unsigned workers = default_workers();
  double tol = 1e-9;
  std::string sampler = "trace";
  std::int64_t shell_pad = 10;
  std::uint64_t max_steps = 10'000'000;
  double max_drop_rate = 1e-4;
  bool levels = false;

  std::string out = ".";
  std::string green_cache;

  int l() const { return box_l == 0 ? dim : box_l; }

  void validate() const {
    auto bad = [](const std::string &field, const std::string &msg) {
      throw ConfigError(field + ": " + msg);
    };
    if (std::find(experiment_names().begin(), experiment_names().end(),
                  experiment) == experiment_names().end())
      bad("experiment", "unknown experiment '" + experiment + "'");
    if (dim < kMinDim || dim > kMaxDim) bad("dim", "must be in 3..8");
    if (box < 0) bad("box", "side must be >= 1");
    if (box_l < 0 || box_l > dim) bad("box_l", "must be in 1..dim");
    if (!grid.empty()) {
      if (static_cast<int>(grid.size()) > dim) bad("grid", "more axes than dim");
      for (auto c : grid)
        if (c < 1) bad("grid", "counts must be >= 1");
      if (spacing < 1) bad("spacing", "must be >= 1");
    }
    const int sources = !set.empty() + (box > 0) + !grid.empty();
    if (sources > 1) bad("set", "give only one of set, box, grid");
    if (!(u >= 0.0)) bad("u", "must be >= 0");
    if (!(u2 >= u)) bad("u2", "must be >= u");
    if (!std::isfinite(z)) bad("z", "must be finite");
    if (!(eps > 0.0 && eps < 1.0)) bad("eps", "must be in (0, 1)");
    if (k < 2) bad("k", "must be >= 2");
    if (!(delta > 0.0)) bad("delta", "must be > 0");
    for (auto r : separations)
      if (r < 1) bad("separations", "entries must be >= 1");
    if (replicas < 1) bad("replicas", "must be >= 1");
    if (workers < 1) bad("workers", "must be >= 1");
    if (!(tol > 0.0 && tol <= 1e-3)) bad("tol", "must be in (0, 1e-3]");
    if (sampler != "trace" && sampler != "walk")
      bad("sampler", "must be 'trace' or 'walk'");
    if (shell_pad < 1) bad("shell_pad", "must be >= 1");
    if (max_steps < 1) bad("max_steps", "must be >= 1");
    if (!(max_drop_rate >= 0.0 && max_drop_rate <= 1.0))
      bad("max_drop_rate", "must be in [0, 1]");

    const bool needs_a = experiment != "green" && experiment != "poisson-window";
    if (experiment == "green" && point.empty()) bad("point", "required for green");
    if (needs_a && sources == 0) bad("set", "one of set, box, grid is required");
    if ((experiment == "poisson-window" || experiment == "separation") && box < 1)
      bad("box", "required for " + experiment);
    if (experiment == "decouple" && set2.empty()) bad("set2", "required for decouple");
    if (experiment == "decouple" && set.empty()) bad("set", "required for decouple");
    if ((experiment == "decouple" || experiment == "vacancy") && replicas < 2)
      bad("replicas", "must be >= 2");
  }

  /// Every field that affects results; output locations and the worker
  /// count are left out so reports compare equal across them.
  json to_json() const {
    return json{{"experiment", experiment}, {"dim", dim},
                {"set", set},               {"set2", set2},
                {"point", point},           {"box", box},
                {"box_l", l()},             {"grid", grid},
                {"spacing", spacing},       {"rects", rects},
                {"u", u},                   {"u2", u2},
                {"z", z},                   {"eps", eps},
                {"k", k},                   {"delta", delta},
                {"separations", separations}, {"replicas", replicas},
                {"seed", seed},             {"tol", tol},
                {"sampler", sampler},       {"shell_pad", shell_pad},
                {"max_steps", max_steps},   {"max_drop_rate", max_drop_rate},
                {"levels", levels}};
  }

  /// Overwrites the fields present in j; unknown keys are rejected.
  void merge_json(const json &j) {
    if (!j.is_object()) throw ConfigError("config: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string &key = it.key();
      const json &v = it.value();
      try {
        if (key == "experiment") experiment = v.get<std::string>();
        else if (key == "dim") dim = v.get<int>();
        else if (key == "set") set = v.get<std::string>();
        else if (key == "set2") set2 = v.get<std::string>();
        else if (key == "point") point = v.get<std::string>();
        else if (key == "box") box = v.get<std::int64_t>();
        else if (key == "box_l") box_l = v.get<int>();
        else if (key == "grid") grid = v.get<std::vector<std::int64_t>>();
        else if (key == "spacing") spacing = v.get<std::int64_t>();
        else if (key == "rects") rects = v.get<std::string>();
        else if (key == "u") u = v.get<double>();
        else if (key == "u2") u2 = v.get<double>();
        else if (key == "z") z = v.get<double>();
        else if (key == "eps") eps = v.get<double>();
        else if (key == "k") k = v.get<std::size_t>();
        else if (key == "delta") delta = v.get<double>();
        else if (key == "separations") separations = v.get<std::vector<std::int64_t>>();
        else if (key == "replicas") replicas = v.get<std::size_t>();
        else if (key == "seed") seed = v.get<std::uint64_t>();
        else if (key == "workers") workers = v.get<unsigned>();
        else if (key == "tol") tol = v.get<double>();
        else if (key == "sampler") sampler = v.get<std::string>();
        else if (key == "shell_pad") shell_pad = v.get<std::int64_t>();
        else if (key == "max_steps") max_steps = v.get<std::uint64_t>();
        else if (key == "max_drop_rate") max_drop_rate = v.get<double>();
        else if (key == "levels") levels = v.get<bool>();
        else if (key == "out") out = v.get<std::string>();
        else if (key == "green_cache") green_cache = v.get<std::string>();
        else throw ConfigError("config: unknown key '" + key + "'");
      } catch (const json::exception &e) {
        throw ConfigError(key + ": " + e.what());
      }
    }
  }
};

inline PointSet build_set(const ExperimentConfig &c) {
  if (!c.set.empty()) return parse_point_set(c.dim, c.set);
  if (c.box > 0) return box_set(c.dim, c.box, c.l());
  if (!c.grid.empty()) return grid_set(c.dim, c.grid, c.spacing);
  throw ConfigError("set: one of set, box, grid is required");
}

/// "lo1,lo2:hi1,hi2;..." or, when empty, the unit square, two disjoint
/// halves along the first axis and one quadrant.
inline std::vector<Rectangle> parse_rects(const std::string &text, int l) {
  std::vector<Rectangle> out;
  if (text.empty()) {
    Rectangle all{std::vector<double>(l, 0.0), std::vector<double>(l, 1.0)};
    Rectangle left = all, right = all, corner = all;
    left.hi[0] = 0.5;
    right.lo[0] = 0.5;
    for (auto &v : corner.hi) v = 0.5;
    return {all, left, right, corner};
  }
  auto parse_vec = [&](const std::string &s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        v.push_back(std::stod(tok));
      } catch (const std::exception &) {
        throw ConfigError("rects: bad number '" + tok + "'");
      }
    }
    if (static_cast<int>(v.size()) != l)
      throw ConfigError("rects: each corner needs " + std::to_string(l) + " coordinates");
    return v;
  };
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ConfigError("rects: expected lo:hi");
    Rectangle r{parse_vec(item.substr(0, colon)), parse_vec(item.substr(colon + 1))};
    for (int i = 0; i < l; ++i) {
      if (!(0.0 <= r.lo[i] && r.lo[i] < r.hi[i] && r.hi[i] <= 1.0))
        throw ConfigError("rects: need 0 <= lo < hi <= 1");
    }
    out.push_back(r);
  }
  return out;
}

struct ExperimentOutput {
  json report;
  std::string summary;
  std::string replicas_csv;  // empty when the experiment has none
  std::string levels_csv;
  std::optional<json> equilibrium;
};

/// Owns the Green table for one run, optionally backed by a cache file.
class TableHandle {
 public:
  explicit TableHandle(const ExperimentConfig &c) : path_(c.green_cache) {
    if (!path_.empty() && std::filesystem::exists(path_)) {
      std::ifstream is(path_);
      table_ = std::make_unique<GreenTable>(GreenTable::load(is));
      if (table_->dim() != c.dim || table_->tol() != c.tol)
        throw ConfigError("green_cache: file has dim " + std::to_string(table_->dim()) +
                          " tol " + format_double(table_->tol()) +
                          ", config asks for dim " + std::to_string(c.dim) +
                          " tol " + format_double(c.tol));
    } else {
      table_ = std::make_unique<GreenTable>(c.dim, c.tol);
    }
  }
  GreenTable &operator*() const { return *table_; }
  void save() const {
    if (path_.empty()) return;
    std::ofstream os(path_, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write green cache " + path_);
    table_->save(os);
  }

 private:
  std::string path_;
  std::unique_ptr<GreenTable> table_;
};

namespace detail {

inline SamplerKind sampler_kind(const ExperimentConfig &c) {
  return c.sampler == "walk" ? SamplerKind::walk : SamplerKind::trace;
}

inline SamplerConfig sampler_config(const ExperimentConfig &c) {
  SamplerConfig s;
  s.shell_radius_pad = c.shell_pad;
  s.max_steps_per_trajectory = c.max_steps;
  return s;
}

inline json base_report(const ExperimentConfig &c, std::size_t n_replicas,
                        std::size_t dropped) {
  return json{{"experiment", c.experiment}, {"version", kVersion},
              {"params", c.to_json()},      {"n_replicas", n_replicas},
              {"dropped", dropped},         {"seed", c.seed}};
}

inline std::string cover_csv(const std::vector<CoverResult> &reps,
                             const std::vector<std::size_t> &ids,
                             std::uint64_t seed) {
  std::string s = "replica_id,n_points,M,n_trajectories,seed,stream_id\n";
  for (std::size_t i = 0; i < reps.size(); ++i) {
    s += std::to_string(ids[i]) + "," + std::to_string(reps[i].levels.size()) +
         "," + format_double(reps[i].cover_level) + "," +
         std::to_string(reps[i].n_trajectories) + "," + std::to_string(seed) +
         "," + std::to_string(ids[i]) + "\n";
  }
  return s;
}

inline std::string levels_csv(const std::vector<CoverResult> &reps,
                              const std::vector<std::size_t> &ids) {
  std::string s = "replica_id,point_index,U\n";
  for (std::size_t i = 0; i < reps.size(); ++i)
    for (std::size_t j = 0; j < reps[i].levels.size(); ++j)
      s += std::to_string(ids[i]) + "," + std::to_string(j) + "," +
           format_double(reps[i].levels[j]) + "\n";
  return s;
}

inline ReplicaBatch<CoverResult> cover_replicas(const HitSetSampler &sampler,
                                                const ExperimentConfig &c) {
  return run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    RngStream rng(c.seed, i);
    return sample_cover_levels(sampler, rng);
  });
}

inline ExperimentOutput run_green(const ExperimentConfig &c, const GreenTable &t) {
  const LatticePoint x = parse_point(c.dim, c.point);
  const double v = t(x);
  ExperimentOutput o;
  o.report = base_report(c, 0, 0);
  o.report["statistics"] = {{"value", v},
                            {"g0", t.g0()},
                            {"tol", t.tol()},
                            {"asymptotic", x.norm() >= t.asymptotic_radius()}};
  o.summary = "g(" + x.to_string() + ") = " + format_double(v);
  return o;
}

inline ExperimentOutput run_cap(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  ExperimentOutput o;
  o.report = base_report(c, 0, 0);
  json st{{"capacity", eq.capacity},
          {"n_points", a.size()},
          {"residual", eq.residual},
          {"clipped", eq.clipped},
          {"g0", t.g0()}};
  if (a.size() == 2) st["pair_formula"] = pair_capacity(a[0], a[1], t);
  o.report["statistics"] = st;
  o.equilibrium = to_json(eq);
  o.summary = "capacity = " + format_double(eq.capacity);
  return o;
}

inline ExperimentOutput run_vacancy(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  auto batch = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    RngStream rng(c.seed, i);
    return sample_vacant(*sampler, c.u, rng).count() == a.size();
  });
  std::uint64_t hits = 0;
  for (bool b : batch.results) hits += b;
  const Proportion p = proportion(hits, batch.results.size());
  const double exact = std::exp(-c.u * eq.capacity);
  const double sigma = binomial_sigma(exact, batch.results.size());
  ExperimentOutput o;
  o.report = base_report(c, batch.results.size(), batch.dropped);
  o.report["statistics"] = {{"frequency", p.p},
                            {"stderr", p.stderr_},
                            {"exact", exact},
                            {"capacity", eq.capacity},
                            {"z_score", sigma > 0 ? (p.p - exact) / sigma : 0.0}};
  o.summary = "vacancy frequency = " + format_double(p.p) +
              " (exact " + format_double(exact) + ")";
  return o;
}

inline ExperimentOutput run_cover(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  auto batch = cover_replicas(*sampler, c);
  const double g0 = t.g0();
  const std::size_t n = a.size();
  std::vector<double> m, z;
  for (const auto &r : batch.results) {
    m.push_back(r.cover_level);
    z.push_back(rescale_cover_level(r.cover_level, n, g0));
  }
  const EmpiricalCdf cdf(z);
  const double ks = ks_distance(cdf, gumbel_cdf);
  const double ua0 = cover_level_at(0.0, n, g0);
  std::uint64_t below = 0;
  for (double v : m) below += v <= ua0;
  const Proportion pb = proportion(below, m.size());
  const MeanVar mm = mean_var(m);
  ExperimentOutput o;
  o.report = base_report(c, batch.results.size(), batch.dropped);
  o.report["statistics"] = {
      {"n_points", n},
      {"capacity", eq.capacity},
      {"g0", g0},
      {"mean_M", mm.mean},
      {"stderr_M", mm.stderr_},
      {"mean_rescaled", mean_var(z).mean},
      {"ks_gumbel", ks},
      {"dkw_band_99", dkw_band(z.size(), 0.01)},
      {"ks_sigma", ks_sigma(z.size())},
      {"u_A0", ua0},
      {"p_M_le_uA0", pb.p},
      {"p_M_le_uA0_stderr", pb.stderr_},
      {"independent_p_uA0", std::pow(1.0 - std::exp(-ua0 / g0), static_cast<double>(n))}};
  o.replicas_csv = cover_csv(batch.results, batch.ids, c.seed);
  if (c.levels) o.levels_csv = levels_csv(batch.results, batch.ids);
  o.summary = "KS(rescaled M, Gumbel) = " + format_double(ks) + " over " +
              std::to_string(z.size()) + " replicas";
  return o;
}

/// Exact Var|A_eps| = sum over ordered pairs x != y of P(x, y vacant)
/// + E|A_eps| - (E|A_eps|)^2.
inline double exact_uncovered_variance(const PointSet &a, double u,
                                       const GreenTable &t) {
  const double g0 = t.g0();
  const double mean = static_cast<double>(a.size()) * std::exp(-u / g0);
  double pairs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      pairs += 2.0 * std::exp(-u * 2.0 / (g0 + t(a[i] - a[j])));
  return pairs + mean - mean * mean;
}

inline ExperimentOutput run_uncovered(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  struct Rep {
    double size;
    bool good;
  };
  auto batch = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    RngStream rng(c.seed, i);
    const IndexSet v = uncovered_set(*sampler, c.eps, rng);
    return Rep{static_cast<double>(v.count()), good_set_check(v, a, c.eps)};
  });
  std::vector<double> sizes;
  std::uint64_t good = 0;
  for (const auto &r : batch.results) {
    sizes.push_back(r.size);
    good += r.good;
  }
  const MeanVar mv = mean_var(sizes);
  const double u = uncovered_level(t.g0(), a.size(), c.eps);
  const double n = static_cast<double>(a.size());
  const double exact_mean = n * std::exp(-u / t.g0());
  const double exact_var = exact_uncovered_variance(a, u, t);
  const Proportion pg = proportion(good, sizes.size());
  ExperimentOutput o;
  o.report = base_report(c, batch.results.size(), batch.dropped);
  o.report["statistics"] = {
      {"level", u},
      {"mean", mv.mean},
      {"stderr", mv.stderr_},
      {"exact_mean", exact_mean},
      {"power_mean", std::pow(n, c.eps)},
      {"variance", mv.var},
      {"exact_variance", exact_var},
      {"good_frequency", pg.p},
      {"good_stderr", pg.stderr_},
      {"good_separation", good_set_separation(a.size(), c.eps, c.dim)},
      {"good_size_window", std::pow(n, 2.0 * c.eps / 3.0)}};
  o.summary = "mean |A_eps| = " + format_double(mv.mean) + " (exact " +
              format_double(exact_mean) + ")";
  return o;
}

inline ExperimentOutput run_window(const ExperimentConfig &c, const GreenTable &t) {
  BoxWindow w{c.l(), c.box, c.z};
  const PointSet box = w.sites(c.dim);
  const auto rects = parse_rects(c.rects, w.l);
  const double u = cover_level_at(c.z, box.size(), t.g0());
  const auto eq = equilibrium(box, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  auto batch = run_replicas(c.replicas, c.workers, [&](std::size_t i) {
    RngStream rng(c.seed, i);
    return sample_vacant(*sampler, u, rng);
  });
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (c.rects.empty()) pairs.emplace_back(1, 2);
  const WindowReport rep = poisson_window_test(batch.results, box, w, rects, pairs);
  json rows = json::array();
  for (std::size_t r = 0; r < rects.size(); ++r) {
    const auto &s = rep.rects[r];
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < box.size(); ++i)
      if (rects[r].contains_scaled(box[i], w.side)) idx.push_back(i);
    const double exact_disp =
        idx.empty() ? 1.0 : exact_vacant_dispersion(box.subset(idx), u, t);
    rows.push_back({{"lo", rects[r].lo},
                    {"hi", rects[r].hi},
                    {"sites", s.sites},
                    {"lebesgue", s.lebesgue},
                    {"mean", s.mean},
                    {"mean_stderr", s.mean_stderr},
                    {"expected_mean", s.expected_mean},
                    {"variance", s.variance},
                    {"dispersion", s.dispersion},
                    {"exact_dispersion", exact_disp},
                    {"dispersion_tolerance", 0.15},
                    {"empty_frequency", s.empty_freq},
                    {"empty_stderr", s.empty_stderr},
                    {"empty_independent", s.empty_independent},
                    {"empty_limit", s.empty_limit}});
  }
  json prs = json::array();
  for (const auto &p : rep.pairs)
    prs.push_back({{"first", p.first},
                   {"second", p.second},
                   {"correlation", p.correlation},
                   {"stderr", p.stderr_}});
  ExperimentOutput o;
  o.report = base_report(c, batch.results.size(), batch.dropped);
  o.report["statistics"] = {{"level", u}, {"box_size", box.size()},
                            {"rectangles", rows}, {"pairs", prs}};
  o.summary = "mean count on [0,1]^l = " + format_double(rep.rects[0].mean) +
              " (expected " + format_double(rep.rects[0].expected_mean) + ")";
  return o;
}

inline ExperimentOutput run_separation(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  auto batch = cover_replicas(*sampler, c);
  const Proportion p = separation_statistic(batch.results, c.k, c.delta, c.box);
  ExperimentOutput o;
  o.report = base_report(c, batch.results.size(), batch.dropped);
  o.report["statistics"] = {{"frequency", p.p},
                            {"stderr", p.stderr_},
                            {"threshold", c.delta * static_cast<double>(c.box)}};
  o.replicas_csv = cover_csv(batch.results, batch.ids, c.seed);
  if (c.levels) o.levels_csv = levels_csv(batch.results, batch.ids);
  o.summary = "P(close pair among last " + std::to_string(c.k) + ") = " +
              format_double(p.p);
  return o;
}

inline ExperimentOutput run_decouple(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet k1 = parse_point_set(c.dim, c.set);
  const PointSet k2 = parse_point_set(c.dim, c.set2);
  const auto rows = decoupling_test(k1, k2, c.u, c.separations, c.replicas, c.seed,
                                    t, c.workers, sampler_kind(c), sampler_config(c));
  json arr = json::array();
  std::size_t dropped = 0, kept = 0;
  for (const auto &r : rows) {
    dropped += r.dropped;
    kept += c.replicas - r.dropped;
    arr.push_back({{"r", r.r},
                   {"distance", r.distance},
                   {"p1", r.p1},
                   {"p2", r.p2},
                   {"p12", r.p12},
                   {"delta", r.delta},
                   {"delta_stderr", r.delta_stderr},
                   {"exact_cov", r.exact_cov},
                   {"scaled", r.scaled},
                   {"exact_scaled", r.exact_scaled}});
  }
  ExperimentOutput o;
  o.report = base_report(c, kept, dropped);
  o.report["statistics"] = {{"rows", arr}};
  o.summary = "decoupling at " + std::to_string(rows.size()) + " separations";
  return o;
}

inline ExperimentOutput run_increment(const ExperimentConfig &c, const GreenTable &t) {
  const PointSet a = build_set(c);
  const auto eq = equilibrium(a, t);
  const auto sampler = make_sampler(sampler_kind(c), eq, t, sampler_config(c));
  const auto rep = increment_consistency_test(*sampler, c.u, c.u2, c.replicas,
                                              c.seed, t, c.workers);
  ExperimentOutput o;
  o.report = base_report(c, rep.replicas, rep.dropped);
  auto chi = [](const ChiSquare &x) {
    return json{{"statistic", x.statistic}, {"df", x.df}, {"p_value", x.p_value}};
  };
  o.report["statistics"] = {{"direct", rep.direct},
                            {"incremental", rep.incremental},
                            {"exact", rep.exact},
                            {"two_sample", chi(rep.two_sample)},
                            {"gof_direct", chi(rep.gof_direct)},
                            {"gof_incremental", chi(rep.gof_incremental)},
                            {"pass", rep.pass()}};
  o.summary = "increment chi-square p = " + format_double(rep.two_sample.p_value);
  return o;
}

}  // namespace detail

/// Runs the experiment without touching the filesystem (apart from the
/// Green cache).
inline ExperimentOutput run_experiment(const ExperimentConfig &c) {
  c.validate();
  TableHandle table(c);
  const GreenTable &t = *table;
  ExperimentOutput o;
  const auto &e = c.experiment;
  if (e == "green") o = detail::run_green(c, t);
  else if (e == "cap") o = detail::run_cap(c, t);
  else if (e == "vacancy") o = detail::run_vacancy(c, t);
  else if (e == "cover-dist") o = detail::run_cover(c, t);
  else if (e == "uncovered") o = detail::run_uncovered(c, t);
  else if (e == "poisson-window") o = detail::run_window(c, t);
  else if (e == "separation") o = detail::run_separation(c, t);
  else if (e == "decouple") o = detail::run_decouple(c, t);
  else o = detail::run_increment(c, t);
  table.save();
  return o;
}

inline std::string report_text(const ExperimentOutput &o) {
  return o.report.dump(2) + "\n";
}

/// FNV-1a over the report text, for replay comparisons.
inline std::uint64_t report_hash(const std::string &text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

/// Writes <out>/<experiment>.json and the CSV files, then enforces the
/// dropped-replica limit.
inline ExperimentOutput run(const ExperimentConfig &c) {
  ExperimentOutput o = run_experiment(c);
  std::filesystem::create_directories(c.out);
  const std::filesystem::path dir(c.out);
  write_text((dir / (c.experiment + ".json")).string(), report_text(o));
  if (!o.replicas_csv.empty())
    write_text((dir / (c.experiment + "_replicas.csv")).string(), o.replicas_csv);
  if (!o.levels_csv.empty())
    write_text((dir / (c.experiment + "_levels.csv")).string(), o.levels_csv);
  if (o.equilibrium)
    write_text((dir / (c.experiment + "_equilibrium.json")).string(),
               o.equilibrium->dump(2) + "\n");
  const double n = o.report["n_replicas"].get<double>() + o.report["dropped"].get<double>();
  if (n > 0 && o.report["dropped"].get<double>() / n >= c.max_drop_rate &&
      o.report["dropped"].get<double>() > 0)
    throw std::runtime_error("dropped-replica rate " +
                             format_double(o.report["dropped"].get<double>() / n) +
                             " reaches the limit " + format_double(c.max_drop_rate));
  return o;
}

}  // namespace interlace

#endif  // INTERLACE_EXPERIMENTS_HPP_
