#include "ecol/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace ecol {

Graph::Graph(std::size_t n, std::vector<Endpoints> edges, bool allow_parallel)
    : n_(n), edges_(std::move(edges)), allow_parallel_(allow_parallel) {
  std::vector<std::size_t> deg(n_, 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Endpoints& ep = edges_[i];
    if (ep.u >= n_ || ep.v >= n_)
      throw std::invalid_argument("edge " + std::to_string(i) + " has an endpoint out of range");
    if (ep.u == ep.v) throw std::invalid_argument("self-loop at edge " + std::to_string(i));
    ++deg[ep.u];
    ++deg[ep.v];
  }
  if (!allow_parallel_) {
    std::vector<std::pair<Vertex, Vertex>> keys;
    keys.reserve(edges_.size());
    for (const Endpoints& ep : edges_) keys.emplace_back(std::min(ep.u, ep.v), std::max(ep.u, ep.v));
    std::sort(keys.begin(), keys.end());
    auto dup = std::adjacent_find(keys.begin(), keys.end());
    if (dup != keys.end())
      throw std::invalid_argument("parallel edges between " + std::to_string(dup->first) + " and " +
                                  std::to_string(dup->second));
  }
  offsets_.assign(n_ + 1, 0);
  for (std::size_t v = 0; v < n_; ++v) offsets_[v + 1] = offsets_[v] + deg[v];
  incidence_.resize(offsets_[n_]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Endpoints& ep = edges_[i];
    incidence_[fill[ep.u]++] = {static_cast<EdgeId>(i), ep.v};
    incidence_[fill[ep.v]++] = {static_cast<EdgeId>(i), ep.u};
  }
  for (std::size_t v = 0; v < n_; ++v) max_degree_ = std::max(max_degree_, deg[v]);
}

void Graph::check_edge(EdgeId e) const {
  if (e >= edges_.size()) throw std::out_of_range("unknown edge id " + std::to_string(e));
}

void Graph::check_vertex(Vertex v) const {
  if (v >= n_) throw std::out_of_range("unknown vertex id " + std::to_string(v));
}

Endpoints Graph::endpoints(EdgeId e) const {
  check_edge(e);
  return edges_[e];
}

std::span<const Incidence> Graph::incident(Vertex v) const {
  return {incidence_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::size_t Graph::degree(Vertex v) const { return offsets_[v + 1] - offsets_[v]; }

Vertex Graph::other(EdgeId e, Vertex v) const {
  const Endpoints& ep = edges_[e];
  return ep.u == v ? ep.v : ep.u;
}

bool Graph::share_endpoint(EdgeId a, EdgeId b) const {
  const Endpoints& x = edges_[a];
  const Endpoints& y = edges_[b];
  return x.u == y.u || x.u == y.v || x.v == y.u || x.v == y.v;
}

LineBfs::LineBfs(const Graph& g) : g_(&g), stamp_(g.num_edges(), 0), dist_(g.num_edges(), 0) {}

const std::vector<BallEntry>& LineBfs::run(EdgeId source, std::size_t radius) {
  g_->check_edge(source);
  if (++current_ == 0) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    current_ = 1;
  }
  out_.clear();
  out_.push_back({source, 0});
  stamp_[source] = current_;
  dist_[source] = 0;
  for (std::size_t head = 0; head < out_.size(); ++head) {
    const BallEntry cur = out_[head];
    if (cur.dist >= radius) continue;
    g_->for_each_line_neighbor(cur.edge, [&](EdgeId f) {
      if (stamp_[f] == current_) return;
      stamp_[f] = current_;
      dist_[f] = cur.dist + 1;
      out_.push_back({f, cur.dist + 1});
    });
  }
  return out_;
}

std::optional<std::uint32_t> LineBfs::distance(EdgeId e) const {
  if (e < stamp_.size() && stamp_[e] == current_) return dist_[e];
  return std::nullopt;
}

LineDistance line_distance(const Graph& g, EdgeId e, EdgeId f) {
  g.check_edge(e);
  g.check_edge(f);
  if (e == f) return std::size_t{0};
  LineBfs bfs(g);
  bfs.run(e, g.num_edges());
  if (auto d = bfs.distance(f)) return std::size_t{*d};
  return Unreachable{};
}

std::vector<EdgeId> ball(const Graph& g, EdgeId e, std::size_t radius) {
  LineBfs bfs(g);
  std::vector<EdgeId> out;
  for (const BallEntry& be : bfs.run(e, radius)) out.push_back(be.edge);
  std::sort(out.begin(), out.end());
  return out;
}

UncoloredEdgeError::UncoloredEdgeError(EdgeId e)
    : std::runtime_error("edge " + std::to_string(e) + " is uncolored"), edge_(e) {}

ColoringReport verify_edge_coloring(const Graph& g, const EdgeColoring& col) {
  if (col.assignment.size() != g.num_edges())
    throw std::invalid_argument("coloring covers " + std::to_string(col.assignment.size()) +
                                " edges, graph has " + std::to_string(g.num_edges()));
  for (EdgeId e = 0; e < g.num_edges(); ++e)
    if (col.assignment[e] == kNoColor) throw UncoloredEdgeError(e);

  ColoringReport rep;
  std::set<Color> used(col.assignment.begin(), col.assignment.end());
  rep.colors_used = used.size();
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    std::map<Color, EdgeId> seen;
    std::size_t fallback = 0;
    for (const Incidence& in : g.incident(v)) {
      const Color c = col.assignment[in.edge];
      if (c > col.main_palette) ++fallback;
      auto [it, fresh] = seen.emplace(c, in.edge);
      if (!fresh && rep.proper) {
        rep.proper = false;
        rep.conflict = std::make_pair(std::min(it->second, in.edge), std::max(it->second, in.edge));
      }
    }
    rep.max_fallback_degree = std::max(rep.max_fallback_degree, fallback);
  }
  return rep;
}

EdgeColoring greedy_edge_coloring(const Graph& g) {
  EdgeColoring out;
  out.assignment.assign(g.num_edges(), kNoColor);
  std::vector<char> taken;
  Color top = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    taken.assign(2 * g.max_degree() + 2, 0);
    g.for_each_line_neighbor(e, [&](EdgeId f) {
      const Color c = out.assignment[f];
      if (c != kNoColor && c < taken.size()) taken[c] = 1;
    });
    Color c = 1;
    while (taken[c]) ++c;
    out.assignment[e] = c;
    top = std::max(top, c);
  }
  out.main_palette = top;
  return out;
}

void require_proper(const Graph& g, const EdgeColoring& col, const char* what) {
  ColoringReport rep;
  try {
    rep = verify_edge_coloring(g, col);
  } catch (const UncoloredEdgeError& err) {
    throw std::invalid_argument(std::string(what) + ": " + err.what());
  }
  if (!rep.proper)
    throw std::invalid_argument(std::string(what) + " is not proper: edges " +
                                std::to_string(rep.conflict->first) + " and " +
                                std::to_string(rep.conflict->second) + " clash");
}

MatchingPartition canonical_matchings(const Graph& g, const EdgeColoring& base, Vertex w,
                                      std::span<const Vertex> U) {
  require_proper(g, base, "base coloring");
  return canonical_matchings_unchecked(g, base, w, U);
}

MatchingPartition canonical_matchings_unchecked(const Graph& g, const EdgeColoring& base, Vertex w,
                                                std::span<const Vertex> U) {
  g.check_vertex(w);
  std::set<Vertex> nbrs;
  for (const Incidence& in : g.incident(w)) nbrs.insert(in.other);
  std::set<EdgeId> edges;
  for (Vertex u : U) {
    g.check_vertex(u);
    if (!nbrs.count(u))
      throw std::invalid_argument("vertex " + std::to_string(u) + " is not a neighbor of " +
                                  std::to_string(w));
    for (const Incidence& in : g.incident(u)) edges.insert(in.edge);
  }
  std::map<Color, std::vector<EdgeId>> classes;
  for (EdgeId e : edges) classes[base.assignment[e]].push_back(e);
  MatchingPartition out;
  for (auto& [c, es] : classes) out.matchings.push_back(std::move(es));
  return out;
}

VertexBfs::VertexBfs(const Graph& g) : g_(&g), mark_(g.num_vertices(), 0) {}

const std::vector<Vertex>& VertexBfs::run(Vertex v, std::size_t radius) {
  g_->check_vertex(v);
  ++stamp_;
  out_.clear();
  frontier_.assign(1, v);
  mark_[v] = stamp_;
  for (std::size_t r = 0; r < radius && !frontier_.empty(); ++r) {
    next_.clear();
    for (Vertex x : frontier_)
      for (const Incidence& in : g_->incident(x)) {
        if (mark_[in.other] == stamp_) continue;
        mark_[in.other] = stamp_;
        next_.push_back(in.other);
        out_.push_back(in.other);
      }
    frontier_.swap(next_);
  }
  return out_;
}

}  // namespace ecol
