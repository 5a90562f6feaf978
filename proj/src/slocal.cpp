#include "ecol/slocal.hpp"

#include <algorithm>
#include <numeric>

#include "json.hpp"
#include "ecol/rng.hpp"

namespace ecol {

LocalityViolation::LocalityViolation(EdgeId center, EdgeId edge, std::size_t radius)
    : std::runtime_error("step at edge " + std::to_string(center) + " read edge " + std::to_string(edge) +
                         " outside its radius-" + std::to_string(radius) + " view"),
      center_(center),
      edge_(edge),
      radius_(radius) {}

LocalView::LocalView(const Graph& g, std::size_t radius, bool keep_reads)
    : g_(&g),
      radius_(radius),
      keep_reads_(keep_reads),
      seen_(g.num_edges(), 0),
      dist_(g.num_edges(), 0),
      read_(g.num_edges(), 0) {}

void LocalView::recenter(EdgeId center) {
  g_->check_edge(center);
  if (++stamp_ == 0) {
    std::fill(seen_.begin(), seen_.end(), 0);
    std::fill(read_.begin(), read_.end(), 0);
    stamp_ = 1;
  }
  center_ = center;
  queue_.clear();
  queue_.push_back(center);
  head_ = 0;
  expanded_ = 0;
  seen_[center] = stamp_;
  dist_[center] = 0;
  step_ = StepAccess{};
  step_.center = center;
  step_.histogram.assign(radius_ + 1, 0);
}

std::uint32_t LocalView::locate(EdgeId f) const {
  if (seen_[f] == stamp_) return dist_[f];
  // Expand one layer at a time until f shows up or the radius is exhausted.
  while (expanded_ < radius_) {
    const std::size_t layer_end = queue_.size();
    for (; head_ < layer_end; ++head_) {
      const EdgeId cur = queue_[head_];
      g_->for_each_line_neighbor(cur, [&](EdgeId x) {
        if (seen_[x] == stamp_) return;
        seen_[x] = stamp_;
        dist_[x] = expanded_ + 1;
        queue_.push_back(x);
      });
    }
    ++expanded_;
    if (seen_[f] == stamp_) return dist_[f];
  }
  throw LocalityViolation(center_, f, radius_);
}

void LocalView::on_edge(EdgeId f) const {
  const std::uint32_t d = locate(f);
  if (read_[f] == stamp_) return;
  read_[f] = stamp_;
  ++step_.histogram[d];
  step_.max_radius = std::max(step_.max_radius, d);
  if (keep_reads_) step_.reads.push_back({f, d});
}

void LocalView::on_vertex(Vertex v) const {
  for (const Incidence& in : g_->incident(v)) on_edge(in.edge);
}

StepAccess LocalView::take_step() {
  while (!step_.histogram.empty() && step_.histogram.back() == 0 && step_.histogram.size() > 1) step_.histogram.pop_back();
  return std::move(step_);
}

std::string algorithm_name(AlgorithmKind k) {
  return k == AlgorithmKind::randomized ? "randomized" : "deterministic";
}

AlgorithmKind parse_algorithm(const std::string& s) {
  if (s == "randomized") return AlgorithmKind::randomized;
  if (s == "deterministic") return AlgorithmKind::deterministic;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

std::size_t required_locality(AlgorithmKind k) { return k == AlgorithmKind::randomized ? 1 : 5; }

Params make_params(const Graph& g, const AlgorithmSpec& spec) {
  const std::size_t delta = spec.delta.value_or(std::max<std::size_t>(1, g.max_degree()));
  return Params(delta, spec.eps, spec.overrides);
}

OnlineRun::OnlineRun(const Graph& g, const AlgorithmSpec& spec) : spec_(spec), state_(g, make_params(g, spec)) {
  if (spec.kind == AlgorithmKind::randomized) {
    chooser_ = std::make_unique<RandomChooser>(spec.seed);
    return;
  }
  potentials_ = std::make_unique<PotentialState>(
      register_potentials(g, greedy_edge_coloring(g), state_.params(), PotentialOptions{spec.mode, false}));
  chooser_ = std::make_unique<DerandChooser>(*potentials_, spec.keep_trace);
}

const DerandChooser* OnlineRun::derand() const { return dynamic_cast<const DerandChooser*>(chooser_.get()); }

namespace {

// Detaches the guard on every exit path.
class GuardScope {
 public:
  GuardScope(ColoringState& s, const ReadGuard* g) : s_(s) { s_.set_guard(g); }
  ~GuardScope() { s_.set_guard(nullptr); }
  GuardScope(const GuardScope&) = delete;
  GuardScope& operator=(const GuardScope&) = delete;

 private:
  ColoringState& s_;
};

}  // namespace

SlocalResult run_slocal(const Graph& g, std::span<const EdgeId> order, const AlgorithmSpec& spec,
                        std::size_t radius, const SlocalOptions& options) {
  if (radius < required_locality(spec.kind))
    throw std::invalid_argument("the " + algorithm_name(spec.kind) + " algorithm needs locality at least " +
                                std::to_string(required_locality(spec.kind)) + ", got " + std::to_string(radius));
  check_arrival_order(g, std::vector<EdgeId>(order.begin(), order.end()));

  OnlineRun run(g, spec);
  ColoringState& s = run.state();
  LocalView view(g, radius, options.keep_reads);
  SlocalResult out;
  out.decisions.reserve(order.size());
  {
    GuardScope scope(s, &view);
    for (EdgeId e : order) {
      view.recenter(e);
      if (options.check_lazy) {
        const std::vector<NeighborTuple> nb = gather_neighbor_tuples(s, view);
        const std::vector<GridNum> lazy = lazy_P_reconstruction(s.params(), e, nb);
        const auto eager = s.P(e);
        if (!std::equal(lazy.begin(), lazy.end(), eager.begin(), eager.end()))
          throw std::logic_error("lazy weights of edge " + std::to_string(e) + " differ from the maintained ones");
        ++out.lazy_checks;
      }
      DecisionRecord rec = process_edge(s, e, run.chooser());
      rec.transitions.clear();
      rec.transitions.shrink_to_fit();
      out.decisions.push_back(std::move(rec));
      out.log.steps.push_back(view.take_step());
    }
  }
  out.coloring = s.coloring();
  out.division_anomalies = s.division_anomalies();
  if (run.potentials()) out.invariants = check_invariants(*run.potentials(), s);
  if (const DerandChooser* d = run.derand()) out.phi_trace = d->trace();
  return out;
}

LocalityAudit audit_locality(const AccessLog& log) {
  LocalityAudit a;
  for (const StepAccess& st : log.steps) {
    if (st.histogram.size() > a.histogram.size()) a.histogram.resize(st.histogram.size(), 0);
    for (std::size_t r = 0; r < st.histogram.size(); ++r) {
      a.histogram[r] += st.histogram[r];
      if (st.histogram[r] > 0) a.max_radius = std::max(a.max_radius, r);
    }
  }
  return a;
}

void write_access_log_jsonl(std::ostream& os, const AccessLog& log) {
  for (std::size_t i = 0; i < log.steps.size(); ++i) {
    const StepAccess& st = log.steps[i];
    nlohmann::json j;
    j["step"] = i;
    j["center"] = st.center;
    j["max_radius"] = st.max_radius;
    j["histogram"] = st.histogram;
    if (!st.reads.empty()) {
      nlohmann::json reads = nlohmann::json::array();
      for (const BallEntry& r : st.reads) reads.push_back({r.edge, r.dist});
      j["reads"] = std::move(reads);
    }
    os << j.dump() << '\n';
  }
}

AccessLog read_access_log_jsonl(std::istream& is) {
  AccessLog log;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      StepAccess st;
      st.center = j.at("center").get<EdgeId>();
      st.max_radius = j.at("max_radius").get<std::uint32_t>();
      st.histogram = j.at("histogram").get<std::vector<std::uint64_t>>();
      if (j.contains("reads"))
        for (const auto& r : j.at("reads")) st.reads.push_back({r.at(0).get<EdgeId>(), r.at(1).get<std::uint32_t>()});
      log.steps.push_back(std::move(st));
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("access log line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return log;
}

std::string order_name(OrderKind k) {
  switch (k) {
    case OrderKind::id: return "id";
    case OrderKind::reverse: return "reverse";
    case OrderKind::star_lb: return "star_lb";
    case OrderKind::random: return "random";
  }
  return "?";
}

OrderKind parse_order(const std::string& s) {
  for (OrderKind k : {OrderKind::id, OrderKind::reverse, OrderKind::star_lb, OrderKind::random})
    if (order_name(k) == s) return k;
  throw std::invalid_argument("unknown arrival order '" + s + "'");
}

std::vector<EdgeId> make_order(const Instance& inst, OrderKind kind, std::uint64_t seed) {
  std::vector<EdgeId> order(inst.graph.num_edges());
  std::iota(order.begin(), order.end(), 0);
  switch (kind) {
    case OrderKind::id:
      break;
    case OrderKind::reverse:
      std::reverse(order.begin(), order.end());
      break;
    case OrderKind::star_lb:
      if (inst.meta.value("kind", "") != "star_lb" || !inst.arrival_order)
        throw std::invalid_argument("the star_lb order needs a star_lb instance with its arrival order");
      order = *inst.arrival_order;
      break;
    case OrderKind::random: {
      Rng rng = keyed_rng({seed, 0x6f72646572ULL});
      shuffle_in_place(order, rng);
      break;
    }
  }
  return order;
}

std::vector<NeighborTuple> gather_neighbor_tuples(const ColoringState& s, const LocalView& view) {
  std::vector<NeighborTuple> out;
  const Graph& g = s.graph();
  g.for_each_line_neighbor(view.center(), [&](EdgeId f) {
    NeighborTuple t;
    t.edge = f;
    t.arrived = s.arrived(f);
    if (t.arrived) t.tuple = &s.record(f);
    out.push_back(t);
  });
  std::sort(out.begin(), out.end(), [](const NeighborTuple& a, const NeighborTuple& b) { return a.edge < b.edge; });
  out.erase(std::unique(out.begin(), out.end(), [](const NeighborTuple& a, const NeighborTuple& b) { return a.edge == b.edge; }),
            out.end());
  return out;
}

std::vector<GridNum> lazy_P_reconstruction(const Params& params, EdgeId center,
                                           std::span<const NeighborTuple> neighbors) {
  std::vector<std::pair<EdgeId, const EdgeRecord*>> arrived;
  for (const NeighborTuple& t : neighbors) {
    if (!t.arrived) continue;
    if (!t.tuple)
      throw std::invalid_argument("arrived neighbor " + std::to_string(t.edge) + " of edge " + std::to_string(center) +
                                  " has no stored tuple");
    arrived.emplace_back(t.edge, t.tuple);
  }
  return replay_weights(params, center, arrived);
}

}  // namespace ecol
