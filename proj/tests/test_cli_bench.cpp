#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ecol/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

#ifndef ECOL_CLI_PATH
#define ECOL_CLI_PATH "ecol"
#endif

struct Result {
  int code = 0;
  std::string output;
};

// Runs the CLI with `args`, stdout and stderr merged.
Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + ECOL_CLI_PATH + "' " + args + " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, got);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// Fresh scratch directory per test case.
fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("ecol_cli_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("deterministic run on the star lower-bound instance is proper and records colors_used") {
  const fs::path d = scratch("star");
  const std::string inst = (d / "star.json").string();
  REQUIRE(cli("generate --kind star_lb --params 3,1 --out " + inst).code == 0);
  const Result r = cli("run --instance " + inst + " --algorithm deterministic --order star_lb --out-dir " + d.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const json s = json::parse(slurp(d / "summary.json"));
  CHECK(s["proper"] == true);
  CHECK(s["colors_used"].get<std::size_t>() >= 3);
  CHECK(s["colors_used"].get<std::size_t>() <= 5);
  CHECK(s["locality_max_radius"].get<std::size_t>() <= 5);
  CHECK(fs::exists(d / "records.jsonl"));
  CHECK(fs::exists(d / "access.jsonl"));

  const Result v = cli("verify --instance " + inst + " --coloring " + (d / "coloring.json").string());
  CHECK(v.code == 0);
  CHECK(v.output.find("proper") == 0);

  CHECK(cli("audit --log " + (d / "access.jsonl").string() + " --radius 5").code == 0);
}

TEST_CASE("verify names the clashing pair of a corrupted coloring") {
  const fs::path d = scratch("verify");
  const std::string inst = (d / "path.json").string();
  REQUIRE(cli("generate --kind path --params 5 --out " + inst).code == 0);
  // Path 0-1-2-3-4: edges 1 (1-2) and 2 (2-3) meet at vertex 2.
  spit(d / "bad.json", R"({"schema":"ecol.coloring.v1","main_palette":2,"colors":[1,2,2,1]})");
  const Result r = cli("verify --instance " + inst + " --coloring " + (d / "bad.json").string());
  CHECK(r.code != 0);
  CHECK(r.output.find("edges 1 (1-2) and 2 (2-3)") != std::string::npos);

  spit(d / "hole.json", R"({"schema":"ecol.coloring.v1","main_palette":2,"colors":[1,2,0,2]})");
  const Result h = cli("verify --instance " + inst + " --coloring " + (d / "hole.json").string());
  CHECK(h.code != 0);
  CHECK(h.output.find("edge 2") != std::string::npos);
}

TEST_CASE("bench output is byte-identical across runs and carries a versioned header") {
  const fs::path d = scratch("bench");
  spit(d / "bench.json", R"({"schema":"ecol.bench.v1",
    "algorithms":["randomized","deterministic","congest-pipeline"],
    "generator":"random_max_deg","n":[40],"delta":[4],"eps":[0.5],"seeds":[1,2]})");
  const std::string cfg = (d / "bench.json").string();
  const Result a = cli("bench --config " + cfg + " --out " + (d / "a.csv").string());
  const Result b = cli("bench --config " + cfg + " --out " + (d / "b.csv").string());
  INFO(a.output);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  const std::string first = slurp(d / "a.csv");
  CHECK(first == slurp(d / "b.csv"));
  std::istringstream lines(first);
  std::string header, cols;
  std::getline(lines, header);
  std::getline(lines, cols);
  CHECK(header == ecol::kBenchCsvVersion);
  for (const char* c : {"colors_used", "fallback_degree_max", "rounds", "max_congestion_bits", "phi_start",
                        "phi_end", "phi_max_step"})
    CHECK(cols.find(c) != std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == 6);
}

TEST_CASE("the output directory defaults to ECOL_OUTPUT_DIR") {
  const fs::path d = scratch("env");
  const Result r = cli("generate --kind cycle --params 6", "ECOL_OUTPUT_DIR='" + d.string() + "'");
  REQUIRE(r.code == 0);
  CHECK(fs::exists(d / "instance.json"));
  const Result run = cli("run --generator cycle --params 6", "ECOL_OUTPUT_DIR='" + (d / "runs").string() + "'");
  REQUIRE(run.code == 0);
  CHECK(fs::exists(d / "runs" / "coloring.json"));
}

TEST_CASE("configs are checked: schema, unknown keys, bad values") {
  const fs::path d = scratch("config");
  spit(d / "noschema.json", R"({"instance":{"generator":"path","params":[4]}})");
  spit(d / "wrongschema.json", R"({"schema":"ecol.experiment.v0","instance":{"generator":"path","params":[4]}})");
  spit(d / "typo.json", R"({"schema":"ecol.experiment.v1","instance":{"generator":"path","params":[4]},"epss":0.1})");
  spit(d / "badeps.json", R"({"schema":"ecol.experiment.v1","instance":{"generator":"path","params":[4]},"eps":2})");
  spit(d / "badalg.json",
       R"({"schema":"ecol.experiment.v1","instance":{"generator":"path","params":[4]},"algorithm":"magic"})");
  spit(d / "garbage.json", "{ not json");
  for (const char* f : {"noschema", "wrongschema", "typo", "badeps", "badalg", "garbage"}) {
    const Result r = cli("run --config " + (d / (std::string(f) + ".json")).string());
    INFO(f << ": " << r.output);
    CHECK(r.code != 0);
    CHECK(r.output.find("error") != std::string::npos);
  }
  CHECK(cli("run --config " + (d / "typo.json").string()).output.find("epss") != std::string::npos);

  spit(d / "good.json", R"({"schema":"ecol.experiment.v1","instance":{"generator":"random_max_deg","params":[30,3],
    "seed":4},"algorithm":"randomized","eps":0.25,"seed":9,"schedule":"conflict","output_dir":")" +
                            (d / "good").string() + "\"}");
  const Result ok = cli("run --config " + (d / "good.json").string());
  INFO(ok.output);
  CHECK(ok.code == 0);
  const json s = json::parse(slurp(d / "good" / "summary.json"));
  CHECK(s["config"]["schedule"] == "conflict");
  CHECK(s["config"]["seed"] == 9);
}

TEST_CASE("config round trip") {
  ecol::ExperimentConfig c;
  c.instance = {ecol::GeneratorKind::star_lb, {4, 2}, 3};
  c.algorithm = ecol::RunAlgorithm::congest_pipeline;
  c.eps = 0.3;
  c.seed = 11;
  c.order = ecol::OrderKind::reverse;
  c.executor = ecol::Executor::nd;
  c.locality = 5;
  c.mode = ecol::EnumerationMode::restricted(3, 2);
  c.overrides.c_A = 2.5;
  c.network = {ecol::BandwidthMode::local, 32, 77};
  c.target_degree = 5;
  const json j = ecol::config_to_json(c);
  CHECK(ecol::config_to_json(ecol::config_from_json(j)) == j);
}

TEST_CASE("pipeline run writes a round trace with the distsim flags") {
  const fs::path d = scratch("pipe");
  const Result r = cli("run --generator random_max_deg --params 60,10 --gen-seed 3 --algorithm congest-pipeline "
                       "--target-degree 5 --mode congest --bandwidth-bits 96 --round-cap 5000 --seed 1 --out-dir " +
                       d.string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const std::string trace = slurp(d / "trace.csv");
  CHECK(trace.rfind("# ecol round trace v1\nround,max_bits,total_msgs\n", 0) == 0);
  const json s = json::parse(slurp(d / "summary.json"));
  CHECK(s["proper"] == true);
  CHECK(s["config"]["network"]["bandwidth_bits"] == 96);
  CHECK(s["physical_rounds"].get<std::size_t>() >= s["logical_rounds"].get<std::size_t>());

  // A cap below what the push needs stops the run.
  const Result capped = cli("run --generator random_max_deg --params 60,10 --gen-seed 3 --algorithm congest-pipeline "
                            "--target-degree 5 --round-cap 1 --out-dir " + (d / "capped").string());
  CHECK(capped.code != 0);
}

TEST_CASE("schedule build, validate, and reject a corrupted schedule") {
  const fs::path d = scratch("sched");
  const std::string inst = (d / "cycle.json").string();
  REQUIRE(cli("generate --kind cycle --params 12 --out " + inst).code == 0);
  const std::string sched = (d / "s.json").string();
  REQUIRE(cli("schedule --instance " + inst + " --builder distance-l --locality 2 --out " + sched).code == 0);
  CHECK(cli("schedule --instance " + inst + " --validate " + sched + " --locality 2").code == 0);

  json s = json::parse(slurp(sched));
  // Move edge 1 into edge 0's class: they share a vertex.
  auto& classes = s["classes"];
  for (auto& cls : classes) {
    auto it = std::find(cls.begin(), cls.end(), 1);
    if (it != cls.end()) cls.erase(it);
  }
  for (auto& cls : classes)
    if (std::find(cls.begin(), cls.end(), 0) != cls.end()) cls.push_back(1);
  spit(d / "bad.json", s.dump());
  const Result r = cli("schedule --instance " + inst + " --validate " + (d / "bad.json").string() + " --locality 2");
  CHECK(r.code != 0);
  CHECK(r.output.find("edges 0") != std::string::npos);
  CHECK(r.output.find("1 (1-2)") != std::string::npos);

  CHECK(cli("schedule --instance " + inst + " --builder nd --locality 1 --out " + (d / "nd.json").string()).code == 0);
  CHECK(cli("schedule --instance " + inst + " --builder conflict --out " + (d / "c.json").string()).code == 0);
}

TEST_CASE("split writes parts within the target") {
  const fs::path d = scratch("split");
  const Result r = cli("split --generator random_max_deg --params 80,12 --gen-seed 2 --target 4 --eps 0.5 --out " +
                       (d / "split.json").string());
  INFO(r.output);
  REQUIRE(r.code == 0);
  const json s = json::parse(slurp(d / "split.json"));
  std::size_t edges = 0;
  for (const auto& p : s["parts"]) edges += p.size();
  const ecol::Instance inst = ecol::generate({ecol::GeneratorKind::random_max_deg, {80, 12}, 2});
  CHECK(edges == inst.graph.num_edges());
  CHECK(s["halvings"] == 2);
}

TEST_CASE("in-process bench rows match the library run") {
  ecol::BenchConfig b;
  b.algorithms = {ecol::RunAlgorithm::deterministic};
  b.n = {20};
  b.delta = {3};
  b.seeds = {5};
  std::ostringstream os;
  ecol::write_bench_csv(os, b);

  ecol::ExperimentConfig c;
  c.instance = {ecol::GeneratorKind::random_max_deg, {20, 3}, 5};
  c.algorithm = ecol::RunAlgorithm::deterministic;
  c.seed = 5;
  const ecol::RunSummary r = ecol::run_experiment(ecol::load_instance(c), c);
  const std::string row = os.str().substr(os.str().rfind("deterministic,"));
  CHECK(row.find("," + std::to_string(r.report.colors_used) + "," + std::to_string(r.coloring.main_palette) + ",") !=
        std::string::npos);
  REQUIRE(!r.phi.empty());
  CHECK(r.phi.front().phi_before >= r.phi.back().phi_after - 1e-9);
}
