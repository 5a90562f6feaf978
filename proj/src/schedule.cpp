#include "ecol/schedule.hpp"

#include <algorithm>
#include <exception>
#include <numeric>

namespace ecol {

ConflictGraph::ConflictGraph(std::vector<std::size_t> offsets, std::vector<EdgeId> adj)
    : offsets_(std::move(offsets)), adj_(std::move(adj)) {
  if (offsets_.empty() || offsets_.back() != adj_.size()) throw std::invalid_argument("malformed conflict graph");
}

std::size_t ConflictGraph::max_degree() const {
  std::size_t d = 0;
  for (std::size_t e = 0; e + 1 < offsets_.size(); ++e) d = std::max(d, offsets_[e + 1] - offsets_[e]);
  return d;
}

bool ConflictGraph::adjacent(EdgeId e, EdgeId f) const {
  const auto nb = neighbors(e);
  return std::binary_search(nb.begin(), nb.end(), f);
}

namespace {

// Scratch for one thread of the conflict kernel.
class ConflictScratch {
 public:
  ConflictScratch(const Graph& g, const EdgeColoring& base, const std::vector<EdgeId>& color_table, std::size_t colors)
      : g_(g), base_(base), table_(color_table), colors_(colors), bfs_(g), mark_(g.num_edges(), 0),
        dmark_(g.num_edges(), 0), vmark_(g.num_vertices(), 0) {}

  // Calls out(f) once for every f in conflict with e.
  template <typename Out>
  void row(EdgeId e, Out&& out) {
    bump();
    mark_[e] = stamp_;
    for (const BallEntry& b : bfs_.run(e, 3)) take(b.edge, out);
    g_.for_each_line_neighbor(e, [&](EdgeId a) {
      const Color col = base_.assignment[a];
      // Edges within line distance 3 of a have an endpoint within two hops of a's.
      ++vstamp_;
      verts_.clear();
      const Endpoints ea = g_.endpoints(a);
      for (Vertex x : {ea.u, ea.v}) visit(x);
      for (std::size_t i = 0; i < verts_.size(); ++i) {
        const auto [x, depth] = verts_[i];
        if (depth == 2) continue;
        for (const Incidence& in : g_.incident(x)) visit(in.other, depth + 1);
      }
      for (const auto& [z, depth] : verts_) {
        const EdgeId d = table_[std::size_t(z) * colors_ + col];
        if (d == kNone || d == a || dmark_[d] == dstamp_) continue;
        dmark_[d] = dstamp_;
        g_.for_each_line_neighbor(d, [&](EdgeId f) { take(f, out); });
      }
      ++dstamp_;
    });
  }

  static constexpr EdgeId kNone = ~EdgeId{0};

 private:
  void bump() {
    ++stamp_;
    ++dstamp_;
  }
  template <typename Out>
  void take(EdgeId f, Out& out) {
    if (mark_[f] == stamp_) return;
    mark_[f] = stamp_;
    out(f);
  }
  void visit(Vertex x, std::uint32_t depth = 0) {
    if (vmark_[x] == vstamp_) return;
    vmark_[x] = vstamp_;
    verts_.push_back({x, depth});
  }

  const Graph& g_;
  const EdgeColoring& base_;
  const std::vector<EdgeId>& table_;
  std::size_t colors_;
  LineBfs bfs_;
  std::vector<std::uint64_t> mark_, dmark_, vmark_;
  std::uint64_t stamp_ = 0, dstamp_ = 0, vstamp_ = 0;
  std::vector<std::pair<Vertex, std::uint32_t>> verts_;
};

std::vector<EdgeId> color_table(const Graph& g, const EdgeColoring& base, std::size_t colors) {
  std::vector<EdgeId> t(g.num_vertices() * colors, ConflictScratch::kNone);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Endpoints ep = g.endpoints(e);
    t[std::size_t(ep.u) * colors + base.assignment[e]] = e;
    t[std::size_t(ep.v) * colors + base.assignment[e]] = e;
  }
  return t;
}

std::size_t checked_base_colors(const Graph& g, const EdgeColoring& base) {
  require_proper(g, base, "base coloring");
  Color top = 0;
  for (Color c : base.assignment) top = std::max(top, c);
  if (top > 2 * std::max<std::size_t>(1, g.max_degree()))
    throw std::invalid_argument("base coloring uses color " + std::to_string(top) + ", above 2*Delta");
  return std::size_t(top) + 1;
}

// Runs body(e, scratch) for every edge, across threads when asked. The first
// exception thrown by any thread is rethrown.
template <typename Body>
void for_each_edge(const Graph& g, const EdgeColoring& base, Parallelism par, Body&& body) {
  const std::size_t colors = checked_base_colors(g, base);
  const std::vector<EdgeId> table = color_table(g, base, colors);
  const std::int64_t m = static_cast<std::int64_t>(g.num_edges());
  if (par == Parallelism::serial) {
    ConflictScratch scratch(g, base, table, colors);
    for (std::int64_t e = 0; e < m; ++e) body(static_cast<EdgeId>(e), scratch);
    return;
  }
  std::exception_ptr error;
#pragma omp parallel
  {
    ConflictScratch scratch(g, base, table, colors);
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t e = 0; e < m; ++e) {
      try {
        body(static_cast<EdgeId>(e), scratch);
      } catch (...) {
#pragma omp critical
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace

ConflictGraph build_conflict_graph(const Graph& g, const EdgeColoring& base, Parallelism par) {
  std::vector<std::vector<EdgeId>> rows(g.num_edges());
  for_each_edge(g, base, par, [&](EdgeId e, ConflictScratch& sc) {
    std::vector<EdgeId>& r = rows[e];
    sc.row(e, [&](EdgeId f) { r.push_back(f); });
    std::sort(r.begin(), r.end());
  });
  std::vector<std::size_t> offsets(g.num_edges() + 1, 0);
  for (std::size_t e = 0; e < rows.size(); ++e) offsets[e + 1] = offsets[e] + rows[e].size();
  std::vector<EdgeId> adj;
  adj.reserve(offsets.back());
  for (auto& r : rows) {
    adj.insert(adj.end(), r.begin(), r.end());
    std::vector<EdgeId>().swap(r);
  }
  return ConflictGraph(std::move(offsets), std::move(adj));
}

std::vector<std::size_t> conflict_degrees(const Graph& g, const EdgeColoring& base, Parallelism par) {
  std::vector<std::size_t> deg(g.num_edges(), 0);
  for_each_edge(g, base, par, [&](EdgeId e, ConflictScratch& sc) {
    std::size_t k = 0;
    sc.row(e, [&](EdgeId) { ++k; });
    deg[e] = k;
  });
  return deg;
}

EdgeColoring distance_l_edge_coloring(const Graph& g, std::size_t l) {
  if (l < 1) throw std::invalid_argument("distance coloring needs l >= 1");
  EdgeColoring out{std::vector<Color>(g.num_edges(), kNoColor), 0};
  LineBfs bfs(g);
  std::vector<std::uint64_t> used;
  std::uint64_t stamp = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    ++stamp;
    for (const BallEntry& b : bfs.run(e, l)) {
      const Color c = out.assignment[b.edge];
      if (c == kNoColor) continue;
      if (used.size() <= c) used.resize(c + 1, 0);
      used[c] = stamp;
    }
    Color c = 1;
    while (c < used.size() && used[c] == stamp) ++c;
    out.assignment[e] = c;
    out.main_palette = std::max<std::size_t>(out.main_palette, c);
  }
  return out;
}

std::size_t line_power_degree(const Graph& g, std::size_t l) {
  LineBfs bfs(g);
  std::size_t d = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) d = std::max(d, bfs.run(e, l).size() - 1);
  return d;
}

PaletteReduction reduce_palette(const ConflictGraph& conflict, std::span<const Color> initial, Parallelism par) {
  const std::size_t n = conflict.num_nodes();
  if (initial.size() != n)
    throw std::invalid_argument("initial coloring has " + std::to_string(initial.size()) + " entries for " +
                                std::to_string(n) + " nodes");
  for (EdgeId v = 0; v < n; ++v) {
    if (initial[v] == kNoColor) throw std::invalid_argument("node " + std::to_string(v) + " has no initial color");
    for (EdgeId u : conflict.neighbors(v))
      if (initial[u] == initial[v])
        throw std::invalid_argument("initial coloring is improper: nodes " + std::to_string(v) + " and " +
                                    std::to_string(u) + " share color " + std::to_string(initial[v]));
  }
  PaletteReduction out;
  out.colors.assign(n, kNoColor);
  std::size_t left = n;
  if (par == Parallelism::serial) {
    std::vector<EdgeId> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](EdgeId a, EdgeId b) { return initial[a] < initial[b]; });
    for (Color r = 1; left > 0; ++r) {
      ++out.rounds;
      for (EdgeId v : order) {
        if (out.colors[v] != kNoColor) continue;
        const auto nb = conflict.neighbors(v);
        if (std::none_of(nb.begin(), nb.end(), [&](EdgeId u) { return out.colors[u] == r; })) {
          out.colors[v] = r;
          --left;
        }
      }
    }
  } else {
    // 0 undecided, 1 adopts, 2 rejected for this color.
    std::vector<std::uint8_t> status(n), next(n);
    const std::int64_t nn = static_cast<std::int64_t>(n);
    for (Color r = 1; left > 0; ++r) {
      ++out.rounds;
      for (EdgeId v = 0; v < n; ++v) status[v] = out.colors[v] == kNoColor ? 0 : 2;
      bool pending = true;
      while (pending) {
        ++out.sub_rounds;
        std::size_t undecided = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : undecided)
        for (std::int64_t i = 0; i < nn; ++i) {
          const EdgeId v = static_cast<EdgeId>(i);
          next[v] = status[v];
          if (status[v] != 0) continue;
          bool blocked = false, minimal = true;
          for (EdgeId u : conflict.neighbors(v)) {
            if (out.colors[u] == r || status[u] == 1) {
              blocked = true;
              break;
            }
            if (status[u] == 0 && initial[u] < initial[v]) minimal = false;
          }
          if (blocked) next[v] = 2;
          else if (minimal) next[v] = 1;
          else ++undecided;
        }
        status.swap(next);
        pending = undecided > 0;
      }
      for (EdgeId v = 0; v < n; ++v)
        if (status[v] == 1 && out.colors[v] == kNoColor) {
          out.colors[v] = r;
          --left;
        }
    }
  }
  for (Color c : out.colors) out.palette = std::max<std::size_t>(out.palette, c);
  return out;
}

Schedule schedule_from_coloring(std::span<const Color> colors, std::string builder, nlohmann::json params) {
  Schedule s;
  s.builder = std::move(builder);
  s.params = std::move(params);
  std::vector<Color> used(colors.begin(), colors.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  s.classes.resize(used.size());
  for (EdgeId e = 0; e < colors.size(); ++e) {
    const std::size_t k = std::lower_bound(used.begin(), used.end(), colors[e]) - used.begin();
    s.classes[k].push_back(e);
  }
  return s;
}

nlohmann::json schedule_to_json(const Schedule& s) {
  return {{"classes", s.classes}, {"builder", s.builder}, {"params", s.params}};
}

Schedule schedule_from_json(const nlohmann::json& j) {
  Schedule s;
  s.classes = j.at("classes").get<std::vector<std::vector<EdgeId>>>();
  s.builder = j.at("builder").get<std::string>();
  if (s.builder != "conflict" && s.builder != "distance-l" && s.builder != "nd")
    throw std::invalid_argument("unknown schedule builder '" + s.builder + "'");
  s.params = j.value("params", nlohmann::json::object());
  return s;
}

std::vector<EdgeId> induced_order(const Schedule& s) {
  std::vector<EdgeId> out;
  for (const auto& cls : s.classes) {
    std::vector<EdgeId> c = cls;
    std::sort(c.begin(), c.end());
    out.insert(out.end(), c.begin(), c.end());
  }
  return out;
}

ScheduleConflictError::ScheduleConflictError(std::size_t cls, EdgeId e, EdgeId f)
    : std::invalid_argument("schedule class " + std::to_string(cls) + " holds conflicting edges " + std::to_string(e) +
                            " and " + std::to_string(f)),
      cls_(cls),
      e_(e),
      f_(f) {}

void validate_schedule(const Graph& g, const Schedule& s, const ExecuteOptions& options, std::size_t default_distance) {
  const std::size_t m = g.num_edges();
  constexpr std::size_t kUnset = ~std::size_t{0};
  std::vector<std::size_t> cls_of(m, kUnset);
  for (std::size_t k = 0; k < s.classes.size(); ++k)
    for (EdgeId e : s.classes[k]) {
      g.check_edge(e);
      if (cls_of[e] != kUnset) throw std::invalid_argument("edge " + std::to_string(e) + " appears twice in the schedule");
      cls_of[e] = k;
    }
  for (EdgeId e = 0; e < m; ++e)
    if (cls_of[e] == kUnset) throw std::invalid_argument("edge " + std::to_string(e) + " is missing from the schedule");

  if (options.conflict) {
    if (options.conflict->num_nodes() != m) throw std::invalid_argument("conflict graph does not match the graph");
    for (EdgeId e = 0; e < m; ++e)
      for (EdgeId f : options.conflict->neighbors(e))
        if (f > e && cls_of[f] == cls_of[e]) throw ScheduleConflictError(cls_of[e], e, f);
    return;
  }
  const std::size_t l = options.distance.value_or(default_distance);
  LineBfs bfs(g);
  for (EdgeId e = 0; e < m; ++e)
    for (const BallEntry& b : bfs.run(e, l))
      if (b.edge > e && cls_of[b.edge] == cls_of[e]) throw ScheduleConflictError(cls_of[e], e, b.edge);
}

ExecutionResult execute_schedule(const Graph& g, const Schedule& s, const AlgorithmSpec& spec,
                                 const ExecuteOptions& options) {
  validate_schedule(g, s, options, required_locality(spec.kind));
  OnlineRun run(g, spec);
  ColoringState& state = run.state();
  Chooser& chooser = run.chooser();
  ExecutionResult out;
  out.decisions.reserve(g.num_edges());
  std::uint32_t t = 0;
  for (const auto& raw : s.classes) {
    std::vector<EdgeId> cls = raw;
    std::sort(cls.begin(), cls.end());
    std::vector<Decision> ds(cls.size());
    const std::int64_t k = static_cast<std::int64_t>(cls.size());
    if (options.par == Parallelism::parallel && k > 1) {
      std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
      for (std::int64_t i = 0; i < k; ++i) {
        try {
          ds[i] = decide(state, cls[i], chooser);
        } catch (...) {
#pragma omp critical
          if (!error) error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);
    } else {
      for (std::int64_t i = 0; i < k; ++i) ds[i] = decide(state, cls[i], chooser);
    }
    for (std::size_t i = 0; i < cls.size(); ++i) {
      DecisionRecord rec = commit_at(state, cls[i], ds[i], chooser.wants_transitions(), ++t);
      chooser.observe(state, rec);
      rec.transitions = {};
      out.decisions.push_back(std::move(rec));
    }
  }
  out.coloring = state.coloring();
  out.division_anomalies = state.division_anomalies();
  return out;
}

}  // namespace ecol
