#include "cli.hpp"

#include "gllrss/graph.hpp"
#include "gllrss/io.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using gllrss::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gllrss_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream f(p);
  return nlohmann::json::parse(f);
}

std::vector<std::string> small_instance() {
  return {"--nodes", "8", "--signals", "20", "--rank", "2"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"synth", "--trials", "zero"}).code, 1);
  EXPECT_EQ(cli({"synth", "--trials", "0"}).code, 1);
  EXPECT_EQ(cli({"learn"}).code, 1);
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"--version"}).code, 0);
}

TEST(Cli, DataErrors) {
  const fs::path dir = scratch("data");
  std::ofstream(dir / "bad.csv") << "1,2\n3\n";
  const Result r = cli({"learn", (dir / "bad.csv").string(), "--out", (dir / "o").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
  EXPECT_EQ(cli({"learn", (dir / "none.csv").string(), "--out", dir.string()}).code, 2);
  std::ofstream(dir / "cfg.json") << "{not json";
  EXPECT_EQ(cli({"synth", "--config", (dir / "cfg.json").string()}).code, 2);
}

TEST(Cli, GenLearnMetricsPipeline) {
  const fs::path dir = scratch("pipeline");
  const Result g = cli(concat({"gen", "--seed", "4", "--out", (dir / "data").string()}, small_instance()));
  ASSERT_EQ(g.code, 0) << g.err;
  for (const char* f : {"L_true.csv", "L_true_edges.csv", "X.csv", "Y.csv", "R.csv", "manifest.json"})
    EXPECT_TRUE(fs::exists(dir / "data" / f)) << f;

  const Result l = cli({"learn", (dir / "data" / "Y.csv").string(), "--transition", "identity",
                        "--out", (dir / "learn").string()});
  ASSERT_EQ(l.code, 0) << l.err;
  const gllrss::Matrix lhat = gllrss::load_matrix(dir / "learn" / "L_hat.csv");
  EXPECT_TRUE(gllrss::validate_cgl(lhat, 1e-6).ok());
  EXPECT_TRUE(fs::exists(dir / "learn" / "X_hat.csv"));
  EXPECT_TRUE(fs::exists(dir / "learn" / "L_hat_edges.csv"));
  const auto rep = read_json(dir / "learn" / "report.json");
  EXPECT_TRUE(rep["cgl_valid"].get<bool>());
  EXPECT_EQ(rep["transition"]["mode"], "identity");

  const Result m = cli({"metrics", (dir / "learn" / "L_hat.csv").string(),
                        (dir / "data" / "L_true.csv").string(), "--x-hat",
                        (dir / "learn" / "X_hat.csv").string(), "--x-true",
                        (dir / "data" / "X.csv").string()});
  ASSERT_EQ(m.code, 0) << m.err;
  const auto scores = nlohmann::json::parse(m.out);
  for (const char* k : {"precision", "recall", "f_measure", "nmi", "gse", "lce"})
    EXPECT_TRUE(scores[k].is_number()) << k;
}

TEST(Cli, LearnAcfRecordsCoefficients) {
  const fs::path dir = scratch("acf");
  ASSERT_EQ(cli(concat({"gen", "--seed", "2", "--transition", "gaussian", "--out",
                        (dir / "data").string()},
                       small_instance()))
                .code,
            0);
  const Result l = cli({"learn", (dir / "data" / "Y.csv").string(), "--transition", "acf", "--out",
                        (dir / "learn").string()});
  ASSERT_EQ(l.code, 0) << l.err;
  const auto rep = read_json(dir / "learn" / "report.json");
  ASSERT_EQ(rep["transition"]["mode"], "acf");
  ASSERT_EQ(rep["transition"]["coeffs"].size(), 8u);
  for (const auto& c : rep["transition"]["coeffs"]) {
    EXPECT_GE(c.get<double>(), 0.0);
    EXPECT_LT(c.get<double>(), 1.0);
  }
}

TEST(Cli, LearnTransitionFileAndAblationFlag) {
  const fs::path dir = scratch("file");
  ASSERT_EQ(cli(concat({"gen", "--seed", "3", "--transition", "gaussian", "--out",
                        (dir / "data").string()},
                       small_instance()))
                .code,
            0);
  const Result l = cli({"learn", (dir / "data" / "Y.csv").string(), "--transition",
                        "file:" + (dir / "data" / "R.csv").string(), "--gamma", "0", "--out",
                        (dir / "learn").string()});
  ASSERT_EQ(l.code, 0) << l.err;
  const auto rep = read_json(dir / "learn" / "report.json");
  EXPECT_EQ(rep["transition"]["kind"], "diagonal");
  EXPECT_TRUE(rep["hyperparameters"]["nuclear_norm_ablation"].get<bool>());
  EXPECT_EQ(rep["hyperparameters"]["source"], "flags");
  EXPECT_NE(l.out.find("gamma = 0"), std::string::npos);

  std::ofstream(dir / "short.csv") << "0.5\n0.5\n";
  EXPECT_EQ(cli({"learn", (dir / "data" / "Y.csv").string(), "--transition",
                 "file:" + (dir / "short.csv").string(), "--out", (dir / "x").string()})
                .code,
            2);
  EXPECT_EQ(cli({"learn", (dir / "data" / "Y.csv").string(), "--transition", "ar2", "--out",
                 (dir / "x").string()})
                .code,
            1);
}

TEST(Cli, SynthSweepAndFromSweep) {
  const fs::path dir = scratch("synth");
  const Result s = cli(concat({"synth", "--trials", "2", "--seed", "9", "--alpha", "0.05", "--out",
                               (dir / "synth").string()},
                              small_instance()));
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_NE(s.out.find("f_measure,"), std::string::npos);
  const auto rep = read_json(dir / "synth" / "report.json");
  EXPECT_EQ(rep["trials"].size(), 2u);
  EXPECT_DOUBLE_EQ(rep["hyperparameters"]["alpha"].get<double>(), 0.05);

  const Result w = cli(concat({"sweep", "--trials", "1", "--grid-alpha", "0.01", "0.1",
                               "--grid-beta", "1", "--grid-gamma", "0.5", "--out",
                               (dir / "sweep").string()},
                              small_instance()));
  ASSERT_EQ(w.code, 0) << w.err;
  const auto sw = read_json(dir / "sweep" / "sweep.json");
  EXPECT_EQ(sw["rows"].size(), 2u);

  ASSERT_EQ(cli(concat({"gen", "--out", (dir / "data").string()}, small_instance())).code, 0);
  const Result l = cli({"learn", (dir / "data" / "Y.csv").string(), "--from-sweep",
                        (dir / "sweep" / "sweep.json").string(), "--out", (dir / "learn").string()});
  ASSERT_EQ(l.code, 0) << l.err;
  const auto lr = read_json(dir / "learn" / "report.json");
  EXPECT_EQ(lr["hyperparameters"]["source"], "sweep");
  EXPECT_DOUBLE_EQ(lr["hyperparameters"]["alpha"].get<double>(), sw["best"]["alpha"].get<double>());
}

TEST(Cli, AllTrialsFailingIsSolverError) {
  const fs::path dir = scratch("fail");
  std::ofstream(dir / "cfg.json")
      << R"({"graph": {"n": 8}, "signal": {"m": 20, "rank": 2}, "trials": 2,
             "solver": {"proj_max_iter": 1, "proj_tol": 1e-300}})";
  EXPECT_EQ(cli({"synth", "--config", (dir / "cfg.json").string()}).code, 3);
}

TEST(Cli, ConfigFileAndFlagsMerge) {
  const fs::path dir = scratch("cfg");
  std::ofstream(dir / "cfg.json")
      << R"({"graph": {"kind": "grid", "n": 8, "k": 3}, "signal": {"m": 15, "rank": 2}, "trials": 1,
             "solver": {"alpha": 0.2}})";
  const Result r = cli({"synth", "--config", (dir / "cfg.json").string(), "--beta", "3", "--out",
                        dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = read_json(dir / "report.json");
  EXPECT_EQ(rep["config"]["graph"]["kind"], "grid");
  EXPECT_DOUBLE_EQ(rep["hyperparameters"]["alpha"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(rep["hyperparameters"]["beta"].get<double>(), 3.0);
}
