// ecol: generate instances, run the colorings, build and check schedules, split
// degrees, verify colorings, sweep benchmarks and audit access logs.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ecol/experiment.hpp"
#include "ecol/records_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::invalid_argument(path + ": " + e.what());
  }
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_json(const fs::path& p, const json& j) { open_out(p) << j.dump(2) << '\n'; }

std::string edge_str(const ecol::Graph& g, ecol::EdgeId e) {
  const ecol::Endpoints ep = g.endpoints(e);
  return std::to_string(e) + " (" + std::to_string(ep.u) + "-" + std::to_string(ep.v) + ")";
}

struct InstanceArgs {
  std::string file;
  std::string generator;
  std::vector<std::size_t> params;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--instance", file, "instance JSON file");
    app->add_option("--generator", generator, "generator kind instead of a file");
    app->add_option("--params", params, "generator parameters")->delimiter(',');
    app->add_option("--gen-seed", seed, "generator seed");
  }

  ecol::Instance load() const {
    if (!file.empty()) return ecol::read_instance_file(file);
    if (generator.empty()) throw std::invalid_argument("give --instance or --generator");
    return ecol::generate({ecol::parse_generator_kind(generator), params, seed});
  }
};

int cmd_generate(const std::string& kind, const std::vector<std::size_t>& params, std::uint64_t seed,
                 std::string out) {
  const ecol::Instance inst = ecol::generate({ecol::parse_generator_kind(kind), params, seed});
  if (out.empty()) out = (fs::path(ecol::default_output_dir()) / "instance.json").string();
  if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
  ecol::write_instance_file(inst, out);
  std::cout << "wrote " << out << ": n=" << inst.graph.num_vertices() << " m=" << inst.graph.num_edges()
            << " max_degree=" << inst.graph.max_degree() << '\n';
  return 0;
}

int cmd_run(ecol::ExperimentConfig cfg, const ecol::Instance& inst) {
  const fs::path dir = cfg.output_dir.value_or(ecol::default_output_dir());
  const ecol::RunSummary r = ecol::run_experiment(inst, cfg);

  write_json(dir / "coloring.json", ecol::coloring_to_json(r.coloring));
  if (!r.records.empty()) {
    std::ofstream out = open_out(dir / "records.jsonl");
    ecol::write_records_jsonl(out, r.records, r.denom);
  }
  if (!r.access.steps.empty()) {
    std::ofstream out = open_out(dir / "access.jsonl");
    ecol::write_access_log_jsonl(out, r.access);
  }
  if (r.pipeline) {
    std::ofstream out = open_out(dir / "trace.csv");
    ecol::write_trace_csv(out, r.pipeline->trace);
  }

  json s{{"schema", "ecol.summary.v1"},
         {"config", ecol::config_to_json(cfg)},
         {"edges", inst.graph.num_edges()},
         {"max_degree", inst.graph.max_degree()},
         {"proper", r.report.proper},
         {"colors_used", r.report.colors_used},
         {"main_palette", r.coloring.main_palette},
         {"fallback_colors", r.fallback_colors},
         {"fallback_degree_max", r.report.max_fallback_degree},
         {"marked", r.marked},
         {"marked_degree_max", r.max_marked_degree},
         {"rounds", r.rounds},
         {"max_congestion_bits", r.max_congestion_bits}};
  if (r.audit) s["locality_max_radius"] = r.audit->max_radius;
  if (!r.phi.empty()) {
    s["phi_start"] = ecol::to_double(r.phi.front().phi_before);
    s["phi_end"] = ecol::to_double(r.phi.back().phi_after);
  }
  if (r.pipeline) {
    s["target_degree"] = r.pipeline->target_degree;
    s["physical_rounds"] = r.pipeline->trace.physical_rounds;
    s["logical_rounds"] = r.pipeline->trace.logical_rounds;
    s["envelope_bits"] = r.pipeline->envelope_bits;
  }
  write_json(dir / "summary.json", s);
  std::cout << "proper coloring: colors_used=" << r.report.colors_used << " main_palette=" << r.coloring.main_palette
            << " rounds=" << r.rounds << " (outputs in " << dir.string() << ")\n";
  return 0;
}

int cmd_verify(const ecol::Instance& inst, const std::string& coloring_path) {
  const ecol::EdgeColoring col = ecol::coloring_from_json(read_json(coloring_path));
  ecol::ColoringReport rep;
  try {
    rep = ecol::verify_edge_coloring(inst.graph, col);
  } catch (const ecol::UncoloredEdgeError& e) {
    std::cout << "incomplete: edge " << edge_str(inst.graph, e.edge()) << " has no color\n";
    return 1;
  }
  if (!rep.proper) {
    const auto [e, f] = *rep.conflict;
    std::cout << "improper: edges " << edge_str(inst.graph, e) << " and " << edge_str(inst.graph, f)
              << " share color " << col.assignment[e] << '\n';
    return 1;
  }
  std::cout << "proper: colors_used=" << rep.colors_used << " fallback_degree_max=" << rep.max_fallback_degree
            << '\n';
  return 0;
}

int cmd_schedule(const ecol::Instance& inst, const std::string& builder, std::size_t locality, std::uint64_t seed,
                 const std::string& validate, std::string out) {
  const ecol::Graph& g = inst.graph;
  if (!validate.empty()) {
    const ecol::Schedule s = ecol::schedule_from_json(read_json(validate));
    ecol::ExecuteOptions opts;
    std::optional<ecol::ConflictGraph> cg;
    if (s.builder == "conflict") {
      cg = ecol::build_conflict_graph(g, ecol::greedy_edge_coloring(g));
      opts.conflict = &*cg;
    } else {
      opts.distance = locality;
    }
    try {
      ecol::validate_schedule(g, s, opts, locality);
    } catch (const ecol::ScheduleConflictError& e) {
      std::cout << "invalid: class " << e.class_index() << " holds edges " << edge_str(g, e.first()) << " and "
                << edge_str(g, e.second()) << '\n';
      return 1;
    }
    std::cout << "valid: " << s.classes.size() << " classes\n";
    return 0;
  }

  ecol::Schedule s;
  if (builder == "distance-l") {
    s = ecol::schedule_from_coloring(ecol::distance_l_edge_coloring(g, locality).assignment, "distance-l",
                                     {{"l", locality}});
  } else if (builder == "conflict") {
    const ecol::ConflictGraph cg = ecol::build_conflict_graph(g, ecol::greedy_edge_coloring(g));
    std::vector<ecol::Color> initial(g.num_edges());
    for (ecol::EdgeId e = 0; e < g.num_edges(); ++e) initial[e] = e + 1;
    const ecol::PaletteReduction red = ecol::reduce_palette(cg, initial);
    s = ecol::schedule_from_coloring(red.colors, "conflict",
                                     {{"rounds", red.rounds}, {"max_conflict_degree", cg.max_degree()}});
  } else if (builder == "nd") {
    s = ecol::schedule_from_decomposition(g, ecol::nd_decompose(g, locality, seed));
  } else {
    throw std::invalid_argument("unknown builder '" + builder + "' (conflict, distance-l, nd)");
  }
  if (out.empty()) out = (fs::path(ecol::default_output_dir()) / "schedule.json").string();
  write_json(out, ecol::schedule_to_json(s));
  std::cout << "wrote " << out << ": " << s.classes.size() << " classes\n";
  return 0;
}

int cmd_split(const ecol::Instance& inst, std::size_t target, double eps, std::string out) {
  const ecol::DegreeReduction red = ecol::split_to_max_degree(inst.graph, target, eps);
  json levels = json::array();
  for (const ecol::SplitLevel& l : red.levels)
    levels.push_back({{"max_degree", l.max_degree}, {"bound", l.bound}, {"gamma", l.gamma}});
  const json j{{"schema", "ecol.split.v1"},
               {"target", target},
               {"eps", eps},
               {"eta", red.eta},
               {"halvings", red.halvings},
               {"sum_max_degree", red.sum_max_degree},
               {"levels", levels},
               {"parts", red.parts}};
  if (out.empty()) out = (fs::path(ecol::default_output_dir()) / "split.json").string();
  write_json(out, j);
  std::cout << "wrote " << out << ": " << red.parts.size() << " parts after " << red.halvings << " halvings\n";
  for (std::size_t i = 0; i < red.levels.size(); ++i)
    std::cout << "  level " << i << ": max_degree=" << red.levels[i].max_degree << " bound=" << red.levels[i].bound
              << '\n';
  return 0;
}

int cmd_audit(const std::string& log_path, std::size_t radius) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open " + log_path);
  const ecol::LocalityAudit a = ecol::audit_locality(ecol::read_access_log_jsonl(in));
  std::cout << "max_radius=" << a.max_radius << " histogram=";
  for (std::size_t d = 0; d < a.histogram.size(); ++d) std::cout << (d ? "," : "") << a.histogram[d];
  std::cout << '\n';
  if (!a.within(radius)) {
    std::cout << "locality exceeded: reads reach distance " << a.max_radius << " > " << radius << '\n';
    return 1;
  }
  std::cout << "within locality " << radius << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online edge coloring experiments"};
  app.require_subcommand(1);

  std::string gen_kind, gen_out;
  std::vector<std::size_t> gen_params;
  std::uint64_t gen_seed = 0;
  CLI::App* gen = app.add_subcommand("generate", "write a generated instance");
  gen->add_option("--kind", gen_kind, "path, cycle, star_lb, random_max_deg, complete_bipartite")->required();
  gen->add_option("--params", gen_params, "generator parameters")->delimiter(',');
  gen->add_option("--seed", gen_seed);
  gen->add_option("--out", gen_out);

  InstanceArgs run_inst;
  std::string run_config, run_alg = "randomized", run_order = "id", run_sched = "none", run_out, run_mode_bw;
  double run_eps = 0.5;
  std::uint64_t run_seed = 0;
  std::size_t run_bw = 64, run_cap = 100000, run_target = 0, run_k = 0;
  CLI::App* run = app.add_subcommand("run", "run an algorithm and verify its coloring");
  run->add_option("--config", run_config, "experiment config JSON; flags given on the command line override it");
  run_inst.add(run);
  run->add_option("--algorithm", run_alg, "randomized, deterministic, congest-pipeline");
  run->add_option("--eps", run_eps);
  run->add_option("--seed", run_seed);
  run->add_option("--order", run_order, "id, reverse, star_lb, random");
  run->add_option("--schedule", run_sched, "none, distance-l, conflict, nd");
  run->add_option("--restricted-k", run_k, "restricted enumeration with this many subsets");
  run->add_option("--mode", run_mode_bw, "local or congest");
  run->add_option("--bandwidth-bits", run_bw);
  run->add_option("--round-cap", run_cap);
  run->add_option("--target-degree", run_target);
  run->add_option("--out-dir", run_out);

  InstanceArgs sch_inst;
  std::string sch_builder = "conflict", sch_validate, sch_out;
  std::size_t sch_l = 1;
  std::uint64_t sch_seed = 0;
  CLI::App* sch = app.add_subcommand("schedule", "build a schedule, or validate one");
  sch_inst.add(sch);
  sch->add_option("--builder", sch_builder, "conflict, distance-l, nd");
  sch->add_option("--locality", sch_l);
  sch->add_option("--seed", sch_seed);
  sch->add_option("--validate", sch_validate, "schedule JSON to check");
  sch->add_option("--out", sch_out);

  InstanceArgs split_inst;
  std::size_t split_target = 4;
  double split_eps = 0.5;
  std::string split_out;
  CLI::App* split = app.add_subcommand("split", "split edges into parts of small degree");
  split_inst.add(split);
  split->add_option("--target", split_target);
  split->add_option("--eps", split_eps);
  split->add_option("--out", split_out);

  InstanceArgs ver_inst;
  std::string ver_coloring;
  CLI::App* ver = app.add_subcommand("verify", "check that a coloring is proper");
  ver_inst.add(ver);
  ver->add_option("--coloring", ver_coloring)->required();

  std::string bench_config, bench_out;
  CLI::App* bench = app.add_subcommand("bench", "run a sweep and write CSV");
  bench->add_option("--config", bench_config)->required();
  bench->add_option("--out", bench_out);

  std::string audit_log;
  std::size_t audit_radius = 1;
  CLI::App* audit = app.add_subcommand("audit", "check an access log against a locality");
  audit->add_option("--log", audit_log)->required();
  audit->add_option("--radius", audit_radius);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(gen_kind, gen_params, gen_seed, gen_out);
    if (run->parsed()) {
      ecol::ExperimentConfig cfg;
      if (!run_config.empty()) cfg = ecol::config_from_json(read_json(run_config));
      if (run->count("--instance") || run->count("--generator")) {
        cfg.instance_file.reset();
        if (!run_inst.file.empty()) cfg.instance_file = run_inst.file;
        else cfg.instance = {ecol::parse_generator_kind(run_inst.generator), run_inst.params, run_inst.seed};
      } else if (run_config.empty()) {
        throw std::invalid_argument("give --config, --instance or --generator");
      }
      if (run->count("--algorithm")) cfg.algorithm = ecol::parse_run_algorithm(run_alg);
      if (run->count("--eps")) cfg.eps = run_eps;
      if (run->count("--seed")) cfg.seed = run_seed;
      if (run->count("--order")) cfg.order = ecol::parse_order(run_order);
      if (run->count("--schedule")) cfg.executor = ecol::parse_executor(run_sched);
      if (run->count("--restricted-k")) cfg.mode = ecol::EnumerationMode::restricted(run_k, cfg.seed);
      if (run->count("--mode")) cfg.network.mode = ecol::parse_mode(run_mode_bw);
      if (run->count("--bandwidth-bits")) cfg.network.bandwidth_bits = run_bw;
      if (run->count("--round-cap")) cfg.network.round_cap = run_cap;
      if (run->count("--target-degree")) cfg.target_degree = run_target;
      if (run->count("--out-dir")) cfg.output_dir = run_out;
      return cmd_run(cfg, ecol::load_instance(cfg));
    }
    if (sch->parsed()) return cmd_schedule(sch_inst.load(), sch_builder, sch_l, sch_seed, sch_validate, sch_out);
    if (split->parsed()) return cmd_split(split_inst.load(), split_target, split_eps, split_out);
    if (ver->parsed()) return cmd_verify(ver_inst.load(), ver_coloring);
    if (bench->parsed()) {
      const ecol::BenchConfig b = ecol::bench_from_json(read_json(bench_config));
      if (bench_out.empty()) bench_out = (fs::path(ecol::default_output_dir()) / "bench.csv").string();
      std::ofstream out = open_out(bench_out);
      ecol::write_bench_csv(out, b);
      std::cout << "wrote " << bench_out << '\n';
      return 0;
    }
    if (audit->parsed()) return cmd_audit(audit_log, audit_radius);
  } catch (const ecol::RoundCapError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
