#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "interlace/experiments.hpp"

using namespace interlace;

namespace {

std::filesystem::path scratch_dir(const std::string &name) {
  auto p = std::filesystem::temp_directory_path() / ("interlace_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

int run_cli(const std::string &args, std::string *out = nullptr) {
  const auto dir = scratch_dir("cli_stdout");
  const auto file = dir / "stdout.txt";
  const std::string cmd =
      std::string(INTERLACE_CLI) + " " + args + " > " + file.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (out) {
    std::ifstream is(file);
    std::stringstream ss;
    ss << is.rdbuf();
    *out = ss.str();
  }
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ValidationNamesTheField) {
  ExperimentConfig c;
  c.experiment = "cap";
  c.set = "0,0,0";
  EXPECT_NO_THROW(c.validate());
  auto expect_field = [](ExperimentConfig c, const std::string &field) {
    try {
      c.validate();
      ADD_FAILURE() << "no error for " << field;
    } catch (const ConfigError &e) {
      EXPECT_EQ(std::string(e.what()).rfind(field + ":", 0), 0u) << e.what();
    }
  };
  ExperimentConfig bad = c;
  bad.dim = 2;
  expect_field(bad, "dim");
  bad = c;
  bad.eps = 1.0;
  expect_field(bad, "eps");
  bad = c;
  bad.experiment = "nope";
  expect_field(bad, "experiment");
  bad = c;
  bad.box = 4;
  expect_field(bad, "set");
  bad = c;
  bad.sampler = "fast";
  expect_field(bad, "sampler");
  bad = c;
  bad.u2 = 0.1;
  expect_field(bad, "u2");
}

TEST(Config, JsonMergeRejectsUnknownKeys) {
  ExperimentConfig c;
  c.merge_json(json{{"dim", 4}, {"u", 2.5}});
  EXPECT_EQ(c.dim, 4);
  EXPECT_EQ(c.u, 2.5);
  EXPECT_THROW(c.merge_json(json{{"colour", 1}}), ConfigError);
  EXPECT_THROW(c.merge_json(json{{"dim", "three"}}), ConfigError);
}

TEST(Experiments, CapacityOfPair) {
  ExperimentConfig c;
  c.experiment = "cap";
  c.set = "0,0,0;5,0,0";
  const auto o = run_experiment(c);
  GreenTable t(3);
  EXPECT_NEAR(o.report["statistics"]["capacity"].get<double>(),
              2.0 / (t.g0() + t(LatticePoint{5, 0, 0})), 1e-12);
  EXPECT_EQ(o.report["version"], kVersion);
  EXPECT_EQ(o.report["params"]["set"], "0,0,0;5,0,0");
}

TEST(Experiments, ReplayIsIdenticalAcrossWorkerCounts) {
  for (const std::string e : {"cover-dist", "vacancy", "uncovered", "separation"}) {
    ExperimentConfig c;
    c.experiment = e;
    c.box = 4;
    c.box_l = e == "separation" ? 2 : 3;
    c.replicas = 300;
    c.seed = 7;
    c.workers = 1;
    const auto a = run_experiment(c);
    c.workers = 3;
    const auto b = run_experiment(c);
    EXPECT_EQ(report_text(a), report_text(b)) << e;
    EXPECT_EQ(a.replicas_csv, b.replicas_csv) << e;
    c.seed = 8;
    EXPECT_NE(report_text(run_experiment(c)), report_text(a)) << e;
  }
}

TEST(Cli, CapacityCommand) {
  const auto dir = scratch_dir("cap");
  std::string out;
  ASSERT_EQ(run_cli("run cap --dim 3 --set \"0,0,0;5,0,0\" --out " + dir.string(), &out), 0)
      << out;
  GreenTable t(3);
  const double cap = 2.0 / (t.g0() + t(LatticePoint{5, 0, 0}));
  EXPECT_NE(out.find("capacity = "), std::string::npos);
  EXPECT_NEAR(std::stod(out.substr(out.find("= ") + 2)), cap, 1e-12);
  EXPECT_TRUE(std::filesystem::exists(dir / "cap.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "cap_equilibrium.json"));
}

TEST(Cli, GreenCommand) {
  const auto dir = scratch_dir("green");
  std::string out;
  ASSERT_EQ(run_cli("run green --dim 3 --point 0,0,0 --out " + dir.string(), &out), 0);
  EXPECT_NEAR(std::stod(out.substr(out.find("= ") + 2)), 1.516386059151978, 1e-9);
}

TEST(Cli, CoverDistReplayHash) {
  const auto d1 = scratch_dir("cover1"), d2 = scratch_dir("cover2");
  ASSERT_EQ(run_cli("run cover-dist --dim 3 --box 10 --replicas 2000 --seed 7 --workers 1 --out " +
                    d1.string()),
            0);
  ASSERT_EQ(run_cli("run cover-dist --dim 3 --box 10 --replicas 2000 --seed 7 --workers 2 --out " +
                    d2.string()),
            0);
  EXPECT_EQ(report_hash(slurp(d1 / "cover-dist.json")),
            report_hash(slurp(d2 / "cover-dist.json")));
  EXPECT_EQ(slurp(d1 / "cover-dist_replicas.csv"), slurp(d2 / "cover-dist_replicas.csv"));
  const std::string csv = slurp(d1 / "cover-dist_replicas.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "replica_id,n_points,M,n_trajectories,seed,stream_id");
}

TEST(Cli, ConfigFilePrecedence) {
  const auto dir = scratch_dir("config");
  {
    std::ofstream os(dir / "cfg.json");
    os << R"({"dim": 3, "set": "0,0,0", "u": 0.25, "replicas": 50, "seed": 3})";
  }
  ASSERT_EQ(run_cli("run vacancy --config " + (dir / "cfg.json").string() + " --u 0.75 --out " +
                    dir.string()),
            0);
  const auto report = json::parse(slurp(dir / "vacancy.json"));
  EXPECT_EQ(report["params"]["u"].get<double>(), 0.75);
  EXPECT_EQ(report["params"]["replicas"].get<int>(), 50);
  EXPECT_EQ(report["seed"].get<int>(), 3);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("run cap --dim 9 --set 0"), 1);
  EXPECT_EQ(run_cli("run vacancy --set 0,0,0 --u -1"), 1);
  EXPECT_EQ(run_cli("run nonsense"), 1);
  EXPECT_EQ(run_cli("run cap --config /nonexistent.json --set 0,0,0"), 1);
  // A walk sampler with a 2-step budget drops most replicas.
  const auto dir = scratch_dir("drops");
  EXPECT_EQ(run_cli("run vacancy --set \"0,0,0;1,0,0\" --sampler walk --max-steps 2 "
                    "--replicas 20 --out " + dir.string()),
            2);
}

TEST(Cli, GreenCacheRoundTrip) {
  const auto dir = scratch_dir("cache");
  const auto cache = dir / "g3.txt";
  ASSERT_EQ(run_cli("run cap --set \"0,0,0;2,1,0\" --green-cache " + cache.string() +
                    " --out " + dir.string()),
            0);
  ASSERT_TRUE(std::filesystem::exists(cache));
  EXPECT_EQ(slurp(cache).rfind("greens v1 d=3", 0), 0u);
  ASSERT_EQ(run_cli("run cap --set \"0,0,0;2,1,0\" --green-cache " + cache.string() +
                    " --out " + dir.string()),
            0);
  EXPECT_EQ(run_cli("run cap --dim 4 --set 0,0,0,0 --green-cache " + cache.string() +
                    " --out " + dir.string()),
            1);
}
