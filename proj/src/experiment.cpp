#include "ecol/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <stdexcept>

namespace ecol {

namespace {

using nlohmann::json;

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

void require_schema(const json& j, const char* schema) {
  if (!j.is_object() || !j.contains("schema"))
    throw std::invalid_argument(std::string("missing 'schema' (expected ") + schema + ")");
  if (j.at("schema") != schema)
    throw std::invalid_argument("schema '" + j.at("schema").dump() + "' is not " + schema);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad value for '") + key + "': " + e.what());
  }
}

EnumerationMode mode_from_json(const json& j) {
  only_keys(j, {"exact", "k", "budget", "seed"}, "mode");
  EnumerationMode m;
  if (j.contains("exact")) m.exact = get_as<bool>(j, "exact");
  if (j.contains("budget")) m.budget = get_as<std::size_t>(j, "budget");
  if (j.contains("k")) m.k = get_as<std::size_t>(j, "k");
  if (j.contains("seed")) m.seed = get_as<std::uint64_t>(j, "seed");
  if (!m.exact && m.k == 0) throw std::invalid_argument("mode: restricted enumeration needs k >= 1");
  return m;
}

json mode_to_json(const EnumerationMode& m) {
  return m.exact ? json{{"exact", true}, {"budget", m.budget}} : json{{"exact", false}, {"k", m.k}, {"seed", m.seed}};
}

NetworkConfig network_from_json(const json& j) {
  only_keys(j, {"mode", "bandwidth_bits", "round_cap"}, "network");
  NetworkConfig n;
  if (j.contains("mode")) n.mode = parse_mode(get_as<std::string>(j, "mode"));
  if (j.contains("bandwidth_bits")) n.bandwidth_bits = get_as<std::size_t>(j, "bandwidth_bits");
  if (j.contains("round_cap")) n.round_cap = get_as<std::size_t>(j, "round_cap");
  if (n.bandwidth_bits == 0) throw std::invalid_argument("network: bandwidth_bits must be positive");
  return n;
}

json network_to_json(const NetworkConfig& n) {
  return {{"mode", mode_name(n.mode)}, {"bandwidth_bits", n.bandwidth_bits}, {"round_cap", n.round_cap}};
}

AlgorithmKind online_kind(RunAlgorithm a) {
  return a == RunAlgorithm::randomized ? AlgorithmKind::randomized : AlgorithmKind::deterministic;
}

std::string fmt_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

void fill_marked(const Graph& g, RunSummary& out) {
  std::vector<std::size_t> deg(g.num_vertices(), 0);
  for (const DecisionRecord& d : out.records) {
    if (!d.rec.marked) continue;
    ++out.marked;
    const Endpoints ep = g.endpoints(d.edge);
    out.max_marked_degree = std::max({out.max_marked_degree, ++deg[ep.u], ++deg[ep.v]});
  }
}

}  // namespace

std::string run_algorithm_name(RunAlgorithm a) {
  switch (a) {
    case RunAlgorithm::randomized: return "randomized";
    case RunAlgorithm::deterministic: return "deterministic";
    case RunAlgorithm::congest_pipeline: return "congest-pipeline";
  }
  return "?";
}

RunAlgorithm parse_run_algorithm(const std::string& s) {
  if (s == "randomized") return RunAlgorithm::randomized;
  if (s == "deterministic") return RunAlgorithm::deterministic;
  if (s == "congest-pipeline") return RunAlgorithm::congest_pipeline;
  throw std::invalid_argument("unknown algorithm '" + s + "' (randomized, deterministic, congest-pipeline)");
}

std::string executor_name(Executor e) {
  switch (e) {
    case Executor::sequential: return "sequential";
    case Executor::distance: return "distance-l";
    case Executor::conflict: return "conflict";
    case Executor::nd: return "nd";
  }
  return "?";
}

Executor parse_executor(const std::string& s) {
  if (s == "sequential" || s == "none") return Executor::sequential;
  if (s == "distance-l") return Executor::distance;
  if (s == "conflict") return Executor::conflict;
  if (s == "nd") return Executor::nd;
  throw std::invalid_argument("unknown schedule builder '" + s + "' (none, distance-l, conflict, nd)");
}

ExperimentConfig config_from_json(const json& j) {
  require_schema(j, kExperimentSchema);
  only_keys(j,
            {"schema", "instance", "algorithm", "eps", "seed", "order", "schedule", "locality", "mode", "overrides",
             "network", "target_degree", "output_dir"},
            "config");
  ExperimentConfig c;
  if (!j.contains("instance")) throw std::invalid_argument("config: missing 'instance'");
  const json& in = j.at("instance");
  only_keys(in, {"generator", "params", "seed", "file"}, "instance");
  if (in.contains("file")) {
    c.instance_file = get_as<std::string>(in, "file");
  } else {
    if (!in.contains("generator")) throw std::invalid_argument("instance: needs 'generator' or 'file'");
    c.instance.kind = parse_generator_kind(get_as<std::string>(in, "generator"));
    if (in.contains("params")) c.instance.params = get_as<std::vector<std::size_t>>(in, "params");
    if (in.contains("seed")) c.instance.seed = get_as<std::uint64_t>(in, "seed");
  }
  if (j.contains("algorithm")) c.algorithm = parse_run_algorithm(get_as<std::string>(j, "algorithm"));
  if (j.contains("eps")) c.eps = get_as<double>(j, "eps");
  if (!(c.eps > 0 && c.eps < 1)) throw std::invalid_argument("config: eps must lie in (0, 1)");
  if (j.contains("seed")) c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("order")) c.order = parse_order(get_as<std::string>(j, "order"));
  if (j.contains("schedule")) c.executor = parse_executor(get_as<std::string>(j, "schedule"));
  if (j.contains("locality")) c.locality = get_as<std::size_t>(j, "locality");
  if (j.contains("mode")) c.mode = mode_from_json(j.at("mode"));
  if (j.contains("overrides")) {
    const json& o = j.at("overrides");
    only_keys(o, {"c_eps", "c_A", "c_K", "alpha"}, "overrides");
    if (o.contains("c_eps")) c.overrides.c_eps = get_as<double>(o, "c_eps");
    if (o.contains("c_A")) c.overrides.c_A = get_as<double>(o, "c_A");
    if (o.contains("c_K")) c.overrides.c_K = get_as<double>(o, "c_K");
    if (o.contains("alpha")) c.overrides.alpha = get_as<double>(o, "alpha");
  }
  if (j.contains("network")) c.network = network_from_json(j.at("network"));
  if (j.contains("target_degree")) c.target_degree = get_as<std::size_t>(j, "target_degree");
  if (j.contains("output_dir")) c.output_dir = get_as<std::string>(j, "output_dir");
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j{{"schema", kExperimentSchema}};
  if (c.instance_file)
    j["instance"] = {{"file", *c.instance_file}};
  else
    j["instance"] = {{"generator", generator_kind_name(c.instance.kind)},
                     {"params", c.instance.params},
                     {"seed", c.instance.seed}};
  j["algorithm"] = run_algorithm_name(c.algorithm);
  j["eps"] = c.eps;
  j["seed"] = c.seed;
  j["order"] = order_name(c.order);
  j["schedule"] = c.executor == Executor::sequential ? "none" : executor_name(c.executor);
  if (c.locality) j["locality"] = *c.locality;
  j["mode"] = mode_to_json(c.mode);
  json o = json::object();
  if (c.overrides.c_eps) o["c_eps"] = *c.overrides.c_eps;
  if (c.overrides.c_A) o["c_A"] = *c.overrides.c_A;
  if (c.overrides.c_K) o["c_K"] = *c.overrides.c_K;
  if (c.overrides.alpha) o["alpha"] = *c.overrides.alpha;
  j["overrides"] = o;
  j["network"] = network_to_json(c.network);
  if (c.target_degree) j["target_degree"] = *c.target_degree;
  if (c.output_dir) j["output_dir"] = *c.output_dir;
  return j;
}

Instance load_instance(const ExperimentConfig& c) {
  return c.instance_file ? read_instance_file(*c.instance_file) : generate(c.instance);
}

RunSummary run_experiment(const Instance& inst, const ExperimentConfig& c) {
  const Graph& g = inst.graph;
  RunSummary out;

  if (c.algorithm == RunAlgorithm::congest_pipeline) {
    PipelineOptions opts;
    opts.network = c.network;
    opts.target = c.target_degree;
    opts.algorithm.seed = c.seed;
    opts.algorithm.overrides = c.overrides;
    PipelineResult res = congest_pipeline(g, c.eps, opts);
    out.coloring = res.coloring;
    out.rounds = res.trace.physical_rounds;
    for (const RoundRow& row : res.trace.rows) out.max_congestion_bits = std::max(out.max_congestion_bits, row.max_bits);
    out.pipeline = std::move(res);
  } else {
    AlgorithmSpec spec;
    spec.kind = online_kind(c.algorithm);
    spec.seed = c.seed;
    spec.eps = c.eps;
    spec.overrides = c.overrides;
    spec.mode = c.mode;
    spec.keep_trace = spec.kind == AlgorithmKind::deterministic;
    const std::size_t locality = c.locality.value_or(required_locality(spec.kind));
    out.denom = make_params(g, spec).denom();

    switch (c.executor) {
      case Executor::sequential: {
        const std::vector<EdgeId> order = make_order(inst, c.order, c.seed);
        SlocalResult res = run_slocal(g, order, spec, locality);
        out.coloring = std::move(res.coloring);
        out.records = std::move(res.decisions);
        out.access = std::move(res.log);
        out.audit = audit_locality(out.access);
        out.phi = std::move(res.phi_trace);
        out.rounds = g.num_edges();
        break;
      }
      case Executor::distance: {
        const EdgeColoring dl = distance_l_edge_coloring(g, locality);
        const Schedule s = schedule_from_coloring(dl.assignment, "distance-l", {{"l", locality}});
        ExecuteOptions opts;
        opts.distance = locality;
        ExecutionResult res = execute_schedule(g, s, spec, opts);
        out.coloring = std::move(res.coloring);
        out.records = std::move(res.decisions);
        out.rounds = s.classes.size();
        break;
      }
      case Executor::conflict: {
        const ConflictGraph cg = build_conflict_graph(g, greedy_edge_coloring(g));
        std::vector<Color> initial(g.num_edges());
        for (EdgeId e = 0; e < g.num_edges(); ++e) initial[e] = e + 1;
        const PaletteReduction red = reduce_palette(cg, initial);
        const Schedule s = schedule_from_coloring(red.colors, "conflict", {{"rounds", red.rounds}});
        ExecuteOptions opts;
        opts.conflict = &cg;
        ExecutionResult res = execute_schedule(g, s, spec, opts);
        out.coloring = std::move(res.coloring);
        out.records = std::move(res.decisions);
        out.rounds = s.classes.size();
        break;
      }
      case Executor::nd: {
        const NetworkDecomposition nd = nd_decompose(g, locality, c.seed);
        NdExecution res = execute_via_nd(g, nd, spec);
        out.coloring = std::move(res.result.coloring);
        out.records = std::move(res.result.decisions);
        out.rounds = nd.num_classes;
        break;
      }
    }
    fill_marked(g, out);
  }

  out.report = verify_edge_coloring(g, out.coloring);
  if (!out.report.proper) {
    const auto [e, f] = *out.report.conflict;
    throw std::runtime_error("improper coloring: edges " + std::to_string(e) + " and " + std::to_string(f) +
                             " share color " + std::to_string(out.coloring.assignment[e]));
  }
  std::set<Color> fallback;
  for (Color col : out.coloring.assignment)
    if (col > out.coloring.main_palette) fallback.insert(col);
  out.fallback_colors = fallback.size();
  return out;
}

json coloring_to_json(const EdgeColoring& c) {
  return {{"schema", kColoringSchema}, {"main_palette", c.main_palette}, {"colors", c.assignment}};
}

EdgeColoring coloring_from_json(const json& j) {
  require_schema(j, kColoringSchema);
  only_keys(j, {"schema", "main_palette", "colors"}, "coloring");
  EdgeColoring c;
  c.main_palette = get_as<Color>(j, "main_palette");
  c.assignment = get_as<std::vector<Color>>(j, "colors");
  return c;
}

BenchConfig bench_from_json(const json& j) {
  require_schema(j, kBenchSchema);
  only_keys(j, {"schema", "algorithms", "generator", "n", "delta", "eps", "seeds", "schedule", "mode", "network"},
            "bench");
  BenchConfig b;
  if (j.contains("algorithms")) {
    b.algorithms.clear();
    for (const std::string& a : get_as<std::vector<std::string>>(j, "algorithms"))
      b.algorithms.push_back(parse_run_algorithm(a));
  }
  if (j.contains("generator")) b.generator = parse_generator_kind(get_as<std::string>(j, "generator"));
  if (j.contains("n")) b.n = get_as<std::vector<std::size_t>>(j, "n");
  if (j.contains("delta")) b.delta = get_as<std::vector<std::size_t>>(j, "delta");
  if (j.contains("eps")) b.eps = get_as<std::vector<double>>(j, "eps");
  if (j.contains("seeds")) b.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
  if (j.contains("schedule")) b.executor = parse_executor(get_as<std::string>(j, "schedule"));
  if (j.contains("mode")) b.mode = mode_from_json(j.at("mode"));
  if (j.contains("network")) b.network = network_from_json(j.at("network"));
  return b;
}

void write_bench_csv(std::ostream& os, const BenchConfig& b) {
  os << kBenchCsvVersion << '\n'
     << "algorithm,generator,n,delta,eps,seed,edges,colors_used,main_palette,fallback_degree_max,rounds,"
        "max_congestion_bits,phi_start,phi_end,phi_max_step\n";
  for (RunAlgorithm alg : b.algorithms)
    for (std::size_t n : b.n)
      for (std::size_t delta : b.delta)
        for (double eps : b.eps)
          for (std::uint64_t seed : b.seeds) {
            ExperimentConfig c;
            c.instance.kind = b.generator;
            c.instance.seed = seed;
            switch (b.generator) {
              case GeneratorKind::path:
              case GeneratorKind::cycle: c.instance.params = {n}; break;
              case GeneratorKind::star_lb:
                c.instance.params = {delta, std::max<std::size_t>(1, n / (delta * delta + 1))};
                break;
              case GeneratorKind::random_max_deg: c.instance.params = {n, delta}; break;
              case GeneratorKind::complete_bipartite: c.instance.params = {delta, delta}; break;
            }
            c.algorithm = alg;
            c.eps = eps;
            c.seed = seed;
            c.executor = b.executor;
            c.mode = b.mode;
            c.network = b.network;
            const Instance inst = load_instance(c);
            const RunSummary r = run_experiment(inst, c);

            double phi_start = 0, phi_end = 0, phi_step = 0;
            if (!r.phi.empty()) {
              phi_start = to_double(r.phi.front().phi_before);
              phi_end = to_double(r.phi.back().phi_after);
              for (const PhiTraceRow& row : r.phi)
                phi_step = std::max(phi_step, to_double(row.phi_after - row.phi_before));
            }
            const std::size_t fallback_deg =
                alg == RunAlgorithm::congest_pipeline ? r.report.max_fallback_degree : r.max_marked_degree;
            os << run_algorithm_name(alg) << ',' << generator_kind_name(b.generator) << ','
               << inst.graph.num_vertices() << ',' << inst.graph.max_degree() << ',' << eps << ',' << seed << ','
               << inst.graph.num_edges() << ',' << r.report.colors_used << ',' << r.coloring.main_palette << ','
               << fallback_deg << ',' << r.rounds << ',' << r.max_congestion_bits << ',' << fmt_real(phi_start)
               << ',' << fmt_real(phi_end) << ',' << fmt_real(phi_step) << '\n';
          }
}

std::string default_output_dir() {
  const char* env = std::getenv("ECOL_OUTPUT_DIR");
  return env && *env ? env : ".";
}

}  // namespace ecol
