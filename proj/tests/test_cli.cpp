#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fpg/cli_runner.hpp"
#include "fpg/errors.hpp"
#include "fpg/mdp.hpp"
#include "fpg/train.hpp"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fpg_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config loading, overrides, unknown keys") {
  const json cfg = fpg::cli::load_config(
      R"({"env": "nchain:4", "T": 10})", {"gamma=0.8", "mode=exact"},
      fpg::cli::kTrainKeys);
  CHECK(cfg.at("gamma").get<double>() == 0.8);
  CHECK(cfg.at("mode").get<std::string>() == "exact");

  CHECK_THROWS_WITH_AS(
      fpg::cli::load_config(R"({"bogus_key": 1, "other": 2})", {},
                            fpg::cli::kEnvKeys),
      "unknown config keys: bogus_key other", fpg::ValidationError);

  const json a = fpg::cli::load_config(R"({"env":"nchain:4"})", {},
                                       fpg::cli::kEnvKeys);
  const json b = fpg::cli::load_config("", {"env=nchain:4"},
                                       fpg::cli::kEnvKeys);
  CHECK(fpg::cli::config_hash(a) == fpg::cli::config_hash(b));
  CHECK(fpg::cli::config_hash(a) !=
        fpg::cli::config_hash(json{{"env", "nchain:5"}}));
}

TEST_CASE("env dump round trips") {
  std::stringstream out;
  fpg::cli::run_env(json{{"env", "bandit:0,1"}, {"gamma", 0.5}}, out);
  const fpg::TabularMdp back = fpg::mdp_from_json(out.str());
  CHECK(back.n_states == 1);
  CHECK(back.gamma == 0.5);

  std::stringstream deep;
  fpg::cli::run_env(json{{"env", "deepsea:3"}}, deep);
  CHECK(fpg::mdp_from_json(deep.str()).n_states == 10);
}

TEST_CASE("constants report") {
  std::stringstream out;
  fpg::cli::run_constants(json{{"env", "bandit:0,1"},
                               {"gamma", 0.5},
                               {"generator", "kl"},
                               {"lambda", 1.0},
                               {"H", 100}},
                          out);
  const json rep = json::parse(out.str());
  CHECK(rep.at("omega").get<double>() == 1.0);
  CHECK(rep.at("kappa").get<double>() == 1.0);
  CHECK(rep.at("recommended").contains("eta"));

  // Point-mass rho: mu_bar is reported as null, no recommendation.
  std::stringstream chain;
  fpg::cli::run_constants(
      json{{"env", "nchain:4"}, {"generator", "kl"}, {"lambda", 0.5}}, chain);
  CHECK(json::parse(chain.str()).at("mu_bar").is_null());
}

TEST_CASE("landscape sweep") {
  const fs::path dir = fresh_dir("landscape");
  std::stringstream log;
  json cfg{{"env", "bandit:0,1"}, {"gamma", 0.0},    {"generator", "kl"},
           {"lambda", 1.0},       {"grid_min", -2.0}, {"grid_max", 2.0},
           {"grid_step", 1.0},    {"out", dir.string()},
           {"experiment", "sweep"}};
  CHECK(fpg::cli::run_landscape(cfg, log) == 0);
  const std::string csv = slurp(dir / "sweep" / "landscape.csv");
  CHECK(csv.rfind("theta1,theta2,reg_value,grad_norm\n", 0) == 0);
  // 5 x 5 grid plus header.
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 26);
  // The (0,0) row evaluates the reference policy: value 0.5.
  std::istringstream rows(csv);
  std::string line;
  std::getline(rows, line);
  bool found = false;
  while (std::getline(rows, line)) {
    double t1, t2, v, gn;
    char c;
    std::istringstream ls(line);
    ls >> t1 >> c >> t2 >> c >> v >> c >> gn;
    if (t1 == 0.0 && t2 == 0.0) {
      CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(gn > 0.0);
      found = true;
    }
  }
  CHECK(found);

  json nonbandit = cfg;
  nonbandit["env"] = "nchain:3";
  CHECK_THROWS_AS(fpg::cli::run_landscape(nonbandit, log),
                  fpg::ValidationError);
}

TEST_CASE("train grid layout and reproducibility") {
  const fs::path dir = fresh_dir("train");
  std::stringstream log;
  const json cfg{{"env", "nchain:3"},   {"gamma", 0.9},
                 {"generator", "kl"},   {"lambda", json::array({0.1, 1.0})},
                 {"eta", 1e-3},         {"seeds", 2},
                 {"mode", "stochastic"}, {"B", 4},
                 {"H", 12},             {"T", 6},
                 {"log_every", 2},      {"out", dir.string()},
                 {"experiment", "grid"}, {"jobs", 2}};
  CHECK(fpg::cli::run_train(cfg, log) == 0);

  const fs::path cell = dir / "grid" / "kl_lam0.1_eta0.001";
  REQUIRE(fs::exists(cell / "0.csv"));
  REQUIRE(fs::exists(cell / "1.csv"));
  REQUIRE(fs::exists(cell / "meta.json"));
  REQUIRE(fs::exists(dir / "grid" / "summary.json"));

  const json meta = json::parse(slurp(cell / "meta.json"));
  CHECK(meta.at("constants").at("omega").get<double>() == 1.0);
  CHECK(meta.at("config_hash") == fpg::cli::config_hash(cfg));

  const json summary = json::parse(slurp(dir / "grid" / "summary.json"));
  CHECK(summary.at("cells").size() == 2);
  for (const auto& c : summary.at("cells")) {
    CHECK(c.contains("mean_final_return"));
    CHECK(c.contains("stderr_final_return"));
  }

  // Emitted CSVs parse back and satisfy the record invariants.
  std::ifstream csv(cell / "0.csv");
  const fpg::RunRecord rec = fpg::RunRecord::parse_csv(csv);
  CHECK(rec.rows.size() == 4);  // T=6, log_every=2, plus the final iterate
  for (const auto& row : rec.rows) CHECK(row.gap >= -1e-9);

  // Re-running the identical config reproduces the bytes.
  const std::string before = slurp(cell / "0.csv");
  std::stringstream log2;
  CHECK(fpg::cli::run_train(cfg, log2) == 0);
  CHECK(slurp(cell / "0.csv") == before);
}

TEST_CASE("exact mode collapses the seed axis") {
  const fs::path dir = fresh_dir("train_exact");
  std::stringstream log;
  const json cfg{{"env", "bandit:0,1"}, {"gamma", 0.0},
                 {"generator", "kl"},   {"lambda", 1.0},
                 {"eta", 0.01},         {"seeds", 5},
                 {"mode", "exact"},     {"T", 4},
                 {"out", dir.string()}, {"experiment", "exact"}};
  CHECK(fpg::cli::run_train(cfg, log) == 0);
  const fs::path cell = dir / "exact" / "kl_lam1_eta0.01";
  CHECK(fs::exists(cell / "0.csv"));
  CHECK_FALSE(fs::exists(cell / "1.csv"));
}
