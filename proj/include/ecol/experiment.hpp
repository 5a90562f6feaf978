#pragma once
// Experiment configs, single runs with verification, and bench sweeps to CSV.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecol/distsim.hpp"
#include "ecol/generators.hpp"
#include "ecol/schedule.hpp"
#include "ecol/slocal.hpp"

namespace ecol {

inline constexpr const char* kExperimentSchema = "ecol.experiment.v1";
inline constexpr const char* kBenchSchema = "ecol.bench.v1";
inline constexpr const char* kColoringSchema = "ecol.coloring.v1";
inline constexpr const char* kBenchCsvVersion = "# ecol bench csv v1";

enum class RunAlgorithm : std::uint8_t { randomized, deterministic, congest_pipeline };
std::string run_algorithm_name(RunAlgorithm a);
RunAlgorithm parse_run_algorithm(const std::string& s);

// How the online algorithms are driven: one edge at a time, or through a schedule.
enum class Executor : std::uint8_t { sequential, distance, conflict, nd };
std::string executor_name(Executor e);
Executor parse_executor(const std::string& s);

struct ExperimentConfig {
  GeneratorSpec instance;
  std::optional<std::string> instance_file;  // read instead of generating
  RunAlgorithm algorithm = RunAlgorithm::randomized;
  double eps = 0.5;
  std::uint64_t seed = 0;
  OrderKind order = OrderKind::id;
  Executor executor = Executor::sequential;
  std::optional<std::size_t> locality;  // defaults to the algorithm's requirement
  EnumerationMode mode;
  ConstantOverrides overrides;
  NetworkConfig network;
  std::optional<std::size_t> target_degree;  // pipeline
  std::optional<std::string> output_dir;     // falls back to default_output_dir()
};

// Unknown keys and bad values throw invalid_argument with the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);

Instance load_instance(const ExperimentConfig& c);

struct RunSummary {
  EdgeColoring coloring;
  ColoringReport report;
  std::vector<DecisionRecord> records;  // empty for the pipeline
  GridNum denom = 0;
  AccessLog access;                     // sequential runs only
  std::optional<LocalityAudit> audit;
  std::vector<PhiTraceRow> phi;
  std::size_t marked = 0;
  std::size_t max_marked_degree = 0;
  std::size_t fallback_colors = 0;
  // Sequential runs: arrivals. Scheduled runs: classes. Pipeline: physical rounds.
  std::size_t rounds = 0;
  std::size_t max_congestion_bits = 0;  // pipeline only
  std::optional<PipelineResult> pipeline;
};

// Runs the configured algorithm and verifies the coloring; an improper or
// incomplete result throws runtime_error naming the conflicting pair.
RunSummary run_experiment(const Instance& inst, const ExperimentConfig& c);

nlohmann::json coloring_to_json(const EdgeColoring& c);
EdgeColoring coloring_from_json(const nlohmann::json& j);

struct BenchConfig {
  std::vector<RunAlgorithm> algorithms{RunAlgorithm::randomized};
  GeneratorKind generator = GeneratorKind::random_max_deg;
  std::vector<std::size_t> n{100};
  std::vector<std::size_t> delta{4};
  std::vector<double> eps{0.5};
  std::vector<std::uint64_t> seeds{1};
  Executor executor = Executor::sequential;
  EnumerationMode mode;
  NetworkConfig network;
};

BenchConfig bench_from_json(const nlohmann::json& j);

// Header comment, column line, then one row per (algorithm, n, delta, eps, seed).
void write_bench_csv(std::ostream& os, const BenchConfig& b);

// Directory from ECOL_OUTPUT_DIR, else ".".
std::string default_output_dir();

}  // namespace ecol
