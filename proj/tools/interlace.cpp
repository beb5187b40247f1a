#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "interlace/experiments.hpp"

namespace {

using interlace::ConfigError;
using interlace::ExperimentConfig;

interlace::json read_config_file(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("config: cannot open " + path);
  try {
    return interlace::json::parse(is);
  } catch (const interlace::json::exception &e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Random interlacement cover-level experiments"};
  app.require_subcommand(1);
  auto *run = app.add_subcommand("run", "run one experiment");

  ExperimentConfig flags;
  std::string config_path;
  std::string experiment;
  run->add_option("experiment", experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(interlace::experiment_names()));
  // Every option writes into `flags`; only the ones given on the command
  // line are copied over the config file values.
  std::vector<std::pair<CLI::Option *, void (*)(ExperimentConfig &, const ExperimentConfig &)>> opts;
#define INTERLACE_FLAG(name, field, help)                                   \
  opts.emplace_back(run->add_option(name, flags.field, help),               \
                    [](ExperimentConfig &dst, const ExperimentConfig &src) { \
                      dst.field = src.field;                                \
                    })
  INTERLACE_FLAG("--dim", dim, "lattice dimension (3..8)");
  INTERLACE_FLAG("--set", set, "point set literal \"x,y,z;x,y,z\"");
  INTERLACE_FLAG("--set2", set2, "second point set (decouple)");
  INTERLACE_FLAG("--point", point, "lattice point \"x,y,z\" (green)");
  INTERLACE_FLAG("--box", box, "box side N of B_N^l");
  INTERLACE_FLAG("--box-l", box_l, "box dimension l (default dim)");
  INTERLACE_FLAG("--grid", grid, "grid point counts per axis");
  INTERLACE_FLAG("--spacing", spacing, "grid spacing");
  INTERLACE_FLAG("--rects", rects, "window rectangles \"lo,lo:hi,hi;...\"");
  INTERLACE_FLAG("--u", u, "level u");
  INTERLACE_FLAG("--u2", u2, "second level (increment)");
  INTERLACE_FLAG("--z", z, "level offset z");
  INTERLACE_FLAG("--eps", eps, "epsilon in (0, 1)");
  INTERLACE_FLAG("--k", k, "number of last covered sites (separation)");
  INTERLACE_FLAG("--delta", delta, "relative distance threshold (separation)");
  INTERLACE_FLAG("--separations", separations, "separations r (decouple)");
  INTERLACE_FLAG("--replicas", replicas, "number of replicas");
  INTERLACE_FLAG("--seed", seed, "64-bit seed");
  INTERLACE_FLAG("--workers", workers, "worker threads (default: logical CPUs)");
  INTERLACE_FLAG("--tol", tol, "Green function absolute tolerance");
  INTERLACE_FLAG("--sampler", sampler, "hit-set sampler: trace or walk");
  INTERLACE_FLAG("--shell-pad", shell_pad, "walk sampler shell padding");
  INTERLACE_FLAG("--max-steps", max_steps, "walk sampler step budget per trajectory");
  INTERLACE_FLAG("--max-drop-rate", max_drop_rate, "tolerated dropped-replica rate");
  INTERLACE_FLAG("--out", out, "output directory");
  INTERLACE_FLAG("--green-cache", green_cache, "Green table cache file");
#undef INTERLACE_FLAG
  auto *levels_flag = run->add_flag("--levels", flags.levels, "also write per-point levels CSV");
  run->add_option("--config", config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg.merge_json(read_config_file(config_path));
    for (auto &[opt, copy] : opts)
      if (opt->count() > 0) copy(cfg, flags);
    if (levels_flag->count() > 0) cfg.levels = flags.levels;
    cfg.experiment = experiment;
    const auto out = interlace::run(cfg);
    std::cout << out.summary << "\n";
    return 0;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
