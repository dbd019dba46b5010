#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cem/commands.hpp"
#include "cem/config.hpp"
#include "cem/csv.hpp"
#include "cem/error.hpp"
#include "cem/glm.hpp"

using namespace cem;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = CEM_FIXTURE_DIR;

fs::path fresh_dir(const char* tag) {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("cem_cli_" + std::string(tag) + "_" +
                        std::to_string(::getpid()) + "_" + std::to_string(counter++));
  fs::create_directories(dir);
  return dir;
}

RunConfig prep_config(const fs::path& out) {
  nlohmann::json doc;
  doc["paths"]["trips_csv"] = (kFixtures / "trips_200.csv").string();
  doc["paths"]["centroids_csv"] = (kFixtures / "centroids.csv").string();
  doc["paths"]["output_dir"] = out.string();
  return parse_run_config(doc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cmd_prep on the 200-trip fixture") {
  const fs::path out = fresh_dir("prep");
  std::ostringstream log;
  const fs::path dir = cmd_prep(prep_config(out), log);

  const CsvTable od = read_csv(dir / "od.csv");
  // Only A->B (60 kept) and B->C (54 kept) reach the 50-trip floor.
  REQUIRE(od.rows.size() == 2);
  const std::size_t trips = od.column("Total_number_trips");
  const std::size_t origin = od.column("origin");
  for (const auto& row : od.rows) {
    if (row[origin] == "A") CHECK(row[trips] == "60");
    if (row[origin] == "B") CHECK(row[trips] == "54");
  }

  const std::string plog = slurp(dir / "prep_log.txt");
  CHECK(plog.find("dropped zero fare: 3") != std::string::npos);
  CHECK(plog.find("dropped duration < 60 s: 1") != std::string::npos);
  CHECK(plog.find("dropped distance < 0.25 mi: 1") != std::string::npos);
  CHECK(plog.find("dropped 3-IQR outliers: 3") != std::string::npos);
  CHECK(fs::exists(dir / "manifest.json"));
  CHECK(fs::exists(dir / "od_schema.json"));
}

TEST_CASE("cmd_prep with an unreachable floor emits a warning and no rows") {
  const fs::path out = fresh_dir("prep_floor");
  RunConfig cfg = prep_config(out);
  cfg.min_trips = 1000;
  std::ostringstream log;
  const fs::path dir = cmd_prep(cfg, log);
  const CsvTable od = read_csv(dir / "od.csv");
  CHECK(od.rows.empty());
  CHECK(log.str().find("warning") != std::string::npos);
}

TEST_CASE("cmd_prep validates paths before any work") {
  RunConfig cfg = prep_config(fresh_dir("prep_bad"));
  cfg.centroids_csv = "/nonexistent/centroids.csv";
  std::ostringstream log;
  CHECK_THROWS_AS(cmd_prep(cfg, log), ConfigError);
  CHECK(log.str().empty());  // failed fast, nothing ran
}

TEST_CASE("cmd_generate determinism and generator oracles") {
  SUBCASE("same spec twice gives byte-identical CSV") {
    nlohmann::json doc;
    doc["synthetic"] = {{"n_rows", 400}, {"n_features", 5}, {"n_clusters", 2},
                        {"seed", 9}, {"knowledge_fraction", 0.1}};
    doc["paths"]["output_dir"] = fresh_dir("gen_a").string();
    std::ostringstream log;
    const fs::path a = cmd_generate(parse_run_config(doc), log);
    doc["paths"]["output_dir"] = fresh_dir("gen_b").string();
    const fs::path b = cmd_generate(parse_run_config(doc), log);
    CHECK(slurp(a / "od.csv") == slurp(b / "od.csv"));
    CHECK(slurp(a / "od.csv").size() > 1000);
  }

  SUBCASE("explicit coefficient vectors override the derived ones") {
    SyntheticSpec spec;
    spec.n_rows = 400;
    spec.n_features = 2;
    spec.n_clusters = 2;
    spec.noise = 0.0;
    spec.seed = 8;
    spec.coefficients = {{0.3, -0.2}, {-0.1, 0.4}};
    spec.intercepts = {3.0, 4.0};
    const SyntheticData data = generate_synthetic(spec);
    CHECK(data.coefficients(0, 0) == 0.3);
    CHECK(data.coefficients(1, 1) == 0.4);
    CHECK(data.intercepts[0] == 3.0);
    // Size mismatches are rejected.
    spec.coefficients = {{0.3}};
    CHECK_THROWS_AS(generate_synthetic(spec), InvalidArgumentError);
  }

  SUBCASE("noise = 0 lets per-cluster GLM fits recover planted coefficients") {
    SyntheticSpec spec;
    spec.n_rows = 900;
    spec.n_features = 5;
    spec.n_clusters = 3;
    spec.noise = 0.0;
    spec.seed = 31;
    const SyntheticData data = generate_synthetic(spec);
    for (std::size_t z = 0; z < spec.n_clusters; ++z) {
      std::vector<std::size_t> rows;
      for (std::size_t i = 0; i < data.data.size(); ++i)
        if (data.regime[i] == int(z)) rows.push_back(i);
      REQUIRE(rows.size() > 50);
      const ODPairDataset sub = data.data.subset(rows);
      const GlmModel m = fit_glm(sub.feature_matrix(), sub.targets(), Family::poisson);
      for (std::size_t j = 0; j < spec.n_features; ++j)
        CHECK(m.coefficients()[j + 1] ==
              doctest::Approx(data.coefficients(z, j)).epsilon(1e-6));
    }
  }
}

TEST_CASE("cmd_experiment bundle and rerun determinism") {
  // Generate a small dataset, then run the experiment twice with one config.
  nlohmann::json doc;
  doc["synthetic"] = {{"n_rows", 500}, {"n_features", 5}, {"n_clusters", 2},
                      {"seed", 3}, {"knowledge_fraction", 0.08}};
  doc["paths"]["output_dir"] = fresh_dir("exp_gen").string();
  std::ostringstream log;
  const fs::path gen = cmd_generate(parse_run_config(doc), log);

  nlohmann::json exp;
  exp["paths"]["od_csv"] = (gen / "od.csv").string();
  exp["paths"]["output_dir"] = fresh_dir("exp_run").string();
  exp["schema"] = nlohmann::json::parse(slurp(gen / "od_schema.json"))["columns"];
  exp["knowledge"] = {{"airport", {"AIR_1", "AIR_2"}},
                      {"downtown", {"DTN_1", "DTN_2", "DTN_3"}}};
  exp["clustering"] = {{"methods", {"kmeans"}}, {"k_min", 2}, {"k_max", 3},
                       {"n_seeds", 4}};
  exp["selection"] = {{"families", {"gbdt", "linear"}},
                      {"folds", 5},
                      {"grid_preset", "none"},
                      {"grids", {{"gbdt", {{"trees", {30}}, {"depth", {3}},
                                           {"learning_rate", {0.2}}}}}}};
  exp["seed"] = 2;
  exp["threads"] = 2;

  const fs::path run1 = cmd_experiment(parse_run_config(exp), log);

  const char* bundle[] = {"cluster_shares.csv",    "descriptive_stats.csv",
                          "cv_table.csv",          "benchmark_comparison.csv",
                          "cem_vs_benchmark.csv",  "histogram_bins.csv"};
  for (const char* name : bundle) {
    INFO(name);
    CHECK(fs::exists(run1 / name));
  }
  CHECK(fs::exists(run1 / "assignments.csv"));
  CHECK(fs::exists(run1 / "predictions.csv"));
  CHECK(fs::exists(run1 / "report.txt"));
  CHECK(fs::exists(run1 / "cem_model.bin"));
  CHECK(fs::exists(run1 / "manifest.json"));

  // The manifest lists every emitted file.
  const auto manifest = nlohmann::json::parse(slurp(run1 / "manifest.json"));
  for (const char* name : bundle) {
    bool listed = false;
    for (const auto& o : manifest["outputs"]) listed |= o.get<std::string>() == name;
    CHECK(listed);
  }
  CHECK(manifest["derived_seeds"].contains("split_seed"));
  CHECK(manifest["derived_seeds"].contains("clustering_run_seeds"));

  SUBCASE("rerun reproduces every report byte (timestamps live in the manifest)") {
    const fs::path run2 = cmd_experiment(parse_run_config(exp), log);
    for (const char* name : bundle) {
      INFO(name);
      CHECK(slurp(run1 / name) == slurp(run2 / name));
    }
    CHECK(slurp(run1 / "predictions.csv") == slurp(run2 / "predictions.csv"));
    CHECK(slurp(run1 / "cem_model.bin") == slurp(run2 / "cem_model.bin"));
  }

  SUBCASE("cmd_predict scores a CSV with the saved model") {
    RunConfig pcfg = parse_run_config(nlohmann::json{
        {"paths", {{"output_dir", fresh_dir("pred").string()}}}});
    const fs::path pdir =
        cmd_predict(pcfg, run1 / "cem_model.bin", gen / "od.csv", log);
    const CsvTable preds = read_csv(pdir / "predictions.csv");
    CHECK(preds.rows.size() == 500);
    CHECK(preds.header ==
          std::vector<std::string>{"origin", "destination", "cluster", "y_true",
                                   "y_pred"});
  }
}

TEST_CASE("cli binary exit codes") {
  const std::string bin = CEM_CLI_BIN;
  auto run = [&](const std::string& args) {
    const int status = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run("generate -o " + fresh_dir("exit_ok").string()) == 0);
  // Config errors -> 2.
  CHECK(run("experiment -c /nonexistent.json") == 2);
  {
    const fs::path dir = fresh_dir("exit_cfg");
    std::ofstream bad(dir / "bad.json");
    bad << "{\"split\": {\"fraction\": 2.0}, \"paths\": {\"od_csv\": \"x\"}}";
    bad.close();
    CHECK(run("experiment -c " + (dir / "bad.json").string()) == 2);
  }
  // Data errors -> 3.
  {
    const fs::path dir = fresh_dir("exit_data");
    std::ofstream cfg(dir / "cfg.json");
    cfg << nlohmann::json{
        {"paths",
         {{"od_csv", (dir / "data.csv").string()}, {"output_dir", dir.string()}}},
        {"schema",
         {{{"name", "origin"}, {"role", "key"}},
          {{"name", "destination"}, {"role", "key"}},
          {{"name", "y"}, {"role", "dependent"}},
          {{"name", "f1"}, {"role", "socio_economic"}}}}}.dump();
    cfg.close();
    std::ofstream data(dir / "data.csv");
    data << "origin,destination,y,f1\n";
    for (int i = 0; i < 30; ++i)
      data << "o" << i << ",d" << i << "," << (i % 2 ? "5" : "oops") << ",1\n";
    data.close();
    CHECK(run("experiment -c " + (dir / "cfg.json").string()) == 3);
  }
}
