#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>

#include "ecol/distsim.hpp"
#include "ecol/schedule.hpp"

namespace ecol {

namespace {

// What an arrived edge pushes to its neighborhood: time, color, weights, tag.
struct Tuple {
  EdgeId edge = 0;
  const EdgeRecord* rec = nullptr;
};

class PushProgram : public NodeProgram {
 public:
  PushProgram(const Graph& g, const IdMap& ids, std::span<const Tuple> tuples, std::size_t radius, unsigned time_bits,
              unsigned value_bits)
      : g_(g), ids_(ids), tuples_(tuples), radius_(radius), time_bits_(time_bits), value_bits_(value_bits),
        known_(g.num_vertices()) {
    for (std::size_t i = 0; i < tuples.size(); ++i) by_time_[tuples[i].rec->t] = i;
  }

  std::vector<Envelope> start(Vertex v) override {
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < tuples_.size(); ++i) {
      const Endpoints ep = g_.endpoints(tuples_[i].edge);
      if (ep.u == v || ep.v == v) fresh.push_back(i);
    }
    for (std::size_t i : fresh) known_[v].push_back(i);
    return forward(v, fresh, 0);
  }

  std::vector<Envelope> receive(Vertex v, std::size_t round, std::span<const Envelope> inbox) override {
    std::vector<std::size_t> fresh;
    for (const Envelope& env : inbox) {
      for (std::size_t i : decode(env.msg)) {
        if (std::find(known_[v].begin(), known_[v].end(), i) != known_[v].end()) continue;
        known_[v].push_back(i);
        fresh.push_back(i);
      }
    }
    return forward(v, fresh, round);
  }

  bool halted(Vertex) const override { return true; }

  const std::vector<std::size_t>& known(Vertex v) const { return known_[v]; }

 private:
  static constexpr std::size_t kFieldsPerTupleHead = 5;

  std::vector<Envelope> forward(Vertex v, const std::vector<std::size_t>& fresh, std::size_t hops) const {
    std::vector<Envelope> out;
    if (fresh.empty() || hops >= radius_) return out;
    Message msg;
    for (std::size_t i : fresh) encode(msg, tuples_[i]);
    for (const Incidence& in : g_.incident(v)) {
      if (std::any_of(out.begin(), out.end(), [&](const Envelope& e) { return e.peer == in.other; })) continue;
      out.push_back({in.other, msg});
    }
    return out;
  }

  void encode(Message& msg, const Tuple& t) const {
    const Endpoints ep = g_.endpoints(t.edge);
    msg.push(ids_.ids[ep.u], ids_.bits);
    msg.push(ids_.ids[ep.v], ids_.bits);
    msg.push(t.rec->t, time_bits_);
    msg.push(t.rec->color);
    msg.push(static_cast<std::uint64_t>(t.rec->tag), 2);
    for (GridNum p : t.rec->p_before) msg.push(static_cast<std::uint64_t>(p), value_bits_);
  }

  std::vector<std::size_t> decode(const Message& msg) const {
    std::vector<std::size_t> out;
    const std::size_t fields = msg.num_fields();
    for (std::size_t f = 0; f < fields;) {
      const std::size_t i = by_time_.at(msg.field(f + 2));
      out.push_back(i);
      f += kFieldsPerTupleHead + tuples_[i].rec->p_before.size();
    }
    return out;
  }

  const Graph& g_;
  const IdMap& ids_;
  std::span<const Tuple> tuples_;
  std::size_t radius_;
  unsigned time_bits_, value_bits_;
  std::vector<std::vector<std::size_t>> known_;
  std::unordered_map<std::uint32_t, std::size_t> by_time_;
};

}  // namespace

std::size_t pipeline_target_degree(std::size_t n, double c) {
  const double lg = n > 1 ? std::log2(double(n)) : 0.0;
  return std::max<std::size_t>(4, static_cast<std::size_t>(std::ceil(c * std::sqrt(lg))));
}

PipelineResult congest_pipeline(const Graph& g, double eps, const PipelineOptions& options) {
  PipelineResult out;
  out.target_degree = options.target.value_or(pipeline_target_degree(g.num_vertices(), options.c));
  if (g.max_degree() <= out.target_degree) {
    out.small_degree = true;
    out.coloring = greedy_edge_coloring(g);
    out.max_part_degree = g.max_degree();
    require_proper(g, out.coloring, "pipeline coloring");
    return out;
  }

  out.reduction = split_to_max_degree(g, out.target_degree, eps);
  out.coloring.assignment.assign(g.num_edges(), kNoColor);
  struct PartColors {
    std::vector<EdgeId> edges;
    std::vector<Color> colors;
    Color main = 0;
  };
  std::vector<PartColors> colored;
  const unsigned time_bits = std::max(1u, unsigned(std::bit_width(g.num_edges())));

  for (std::size_t pi = 0; pi < out.reduction.parts.size(); ++pi) {
    const std::vector<EdgeId>& part = out.reduction.parts[pi];
    if (part.empty()) continue;
    const Graph sub = edge_subgraph(g, part);
    out.max_part_degree = std::max(out.max_part_degree, sub.max_degree());

    AlgorithmSpec spec = options.algorithm;
    spec.eps = eps;
    spec.delta.reset();
    if (spec.kind == AlgorithmKind::deterministic && sub.max_degree() > options.exact_max_degree)
      spec.mode = EnumerationMode::restricted(options.restricted_k, spec.seed);

    const ConflictGraph cg = build_conflict_graph(sub, greedy_edge_coloring(sub));
    std::vector<Color> initial(sub.num_edges());
    for (EdgeId e = 0; e < sub.num_edges(); ++e) initial[e] = e + 1;
    const PaletteReduction red = reduce_palette(cg, initial);
    out.schedule_rounds += red.rounds;
    const Schedule sched = schedule_from_coloring(red.colors, "conflict", {{"rounds", red.rounds}});
    ExecuteOptions exec;
    exec.conflict = &cg;
    const ExecutionResult run = execute_schedule(sub, sched, spec, exec);

    const IdMap ids = compress_ids(sub, options.push_radius + 1);
    const Params params = make_params(sub, spec);
    const unsigned value_bits = std::max(1u, unsigned(std::bit_width(static_cast<std::uint64_t>(params.denom()))));
    out.id_bits = std::max(out.id_bits, ids.bits);
    out.value_bits = std::max(out.value_bits, value_bits);

    // Push every class's tuples through the network, one schedule step at a time.
    std::size_t pos = 0;
    for (std::size_t k = 0; k < sched.classes.size(); ++k) {
      std::vector<Tuple> tuples;
      for (std::size_t j = 0; j < sched.classes[k].size(); ++j, ++pos)
        tuples.push_back({run.decisions[pos].edge, &run.decisions[pos].rec});
      PushProgram program(sub, ids, tuples, options.push_radius, time_bits, value_bits);
      const RoundTrace t = run_rounds(sub, program, options.network);
      PipelineStep step;
      step.part = pi;
      step.step = k;
      step.edges = tuples.size();
      step.max_channel_bits = t.max_channel_bits_total;
      step.logical_rounds = t.logical_rounds;
      step.physical_rounds = t.physical_rounds;
      out.steps.push_back(step);
      for (RoundRow row : t.rows) {
        row.round += out.trace.logical_rounds;
        out.trace.rows.push_back(row);
      }
      out.trace.logical_rounds += t.logical_rounds;
      out.trace.physical_rounds += t.physical_rounds;
      out.trace.max_channel_bits_total = std::max(out.trace.max_channel_bits_total, t.max_channel_bits_total);
      if (out.trace.congestion_histogram.size() < t.congestion_histogram.size())
        out.trace.congestion_histogram.resize(t.congestion_histogram.size(), 0);
      for (std::size_t h = 0; h < t.congestion_histogram.size(); ++h)
        out.trace.congestion_histogram[h] += t.congestion_histogram[h];
    }
    colored.push_back({part, run.coloring.assignment, run.coloring.main_palette});
  }

  // Main palettes side by side, then every part's fallback colors after them.
  Color main_total = 0;
  for (const auto& pc : colored) main_total += pc.main;
  Color main_off = 0, fallback_off = main_total;
  for (const auto& pc : colored) {
    Color fallback_used = 0;
    for (std::size_t k = 0; k < pc.edges.size(); ++k) {
      const Color c = pc.colors[k];
      if (c <= pc.main) {
        out.coloring.assignment[pc.edges[k]] = main_off + c;
      } else {
        out.coloring.assignment[pc.edges[k]] = fallback_off + (c - pc.main);
        fallback_used = std::max<Color>(fallback_used, c - pc.main);
      }
    }
    main_off += pc.main;
    fallback_off += fallback_used;
  }
  out.coloring.main_palette = main_total;
  const std::uint64_t d = out.target_degree;
  out.envelope_bits = 4 * d * d * d * (std::uint64_t(out.id_bits) + out.value_bits);
  require_proper(g, out.coloring, "pipeline coloring");
  return out;
}

}  // namespace ecol
