#pragma once
// Undirected graphs with dense ids, line-graph distance queries, and edge colorings.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ecol {

using Vertex = std::uint32_t;
using EdgeId = std::uint32_t;
using Color = std::uint32_t;
inline constexpr Color kNoColor = 0;

struct Endpoints {
  Vertex u = 0;
  Vertex v = 0;
  bool operator==(const Endpoints&) const = default;
};

struct Incidence {
  EdgeId edge = 0;
  Vertex other = 0;
};

class Graph {
 public:
  Graph() = default;
  // Parallel edges are accepted only when allow_parallel is set (virtual graphs of
  // the splitting module). Self-loops are always rejected.
  Graph(std::size_t n, std::vector<Endpoints> edges, bool allow_parallel = false);

  std::size_t num_vertices() const { return n_; }
  std::size_t num_edges() const { return edges_.size(); }
  std::size_t max_degree() const { return max_degree_; }
  bool allows_parallel() const { return allow_parallel_; }

  Endpoints endpoints(EdgeId e) const;
  std::span<const Incidence> incident(Vertex v) const;
  std::size_t degree(Vertex v) const;
  Vertex other(EdgeId e, Vertex v) const;
  bool share_endpoint(EdgeId a, EdgeId b) const;
  const std::vector<Endpoints>& edge_list() const { return edges_; }

  void check_edge(EdgeId e) const;
  void check_vertex(Vertex v) const;

  // Calls fn(f) for every edge f != e sharing an endpoint with e. An edge parallel
  // to e is reported twice.
  template <typename Fn>
  void for_each_line_neighbor(EdgeId e, Fn&& fn) const {
    const Endpoints ep = edges_[e];
    for (const Incidence& in : incident(ep.u))
      if (in.edge != e) fn(in.edge);
    for (const Incidence& in : incident(ep.v))
      if (in.edge != e) fn(in.edge);
  }

 private:
  std::size_t n_ = 0;
  std::vector<Endpoints> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Incidence> incidence_;
  std::size_t max_degree_ = 0;
  bool allow_parallel_ = false;
};

struct Unreachable {
  bool operator==(const Unreachable&) const = default;
};
using LineDistance = std::variant<std::size_t, Unreachable>;

inline bool is_reachable(const LineDistance& d) { return std::holds_alternative<std::size_t>(d); }

// Hop distance between e and f in the line graph L(G).
LineDistance line_distance(const Graph& g, EdgeId e, EdgeId f);

struct BallEntry {
  EdgeId edge = 0;
  std::uint32_t dist = 0;
};

// Reusable bounded BFS over L(G). Stamps avoid clearing per query, so a batch of
// queries on one graph costs only the visited portions.
class LineBfs {
 public:
  explicit LineBfs(const Graph& g);
  // Entries in BFS order; the first entry is the source at distance 0.
  const std::vector<BallEntry>& run(EdgeId source, std::size_t radius);
  // Distance of e in the most recent run, if it was reached.
  std::optional<std::uint32_t> distance(EdgeId e) const;

 private:
  const Graph* g_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> dist_;
  std::uint32_t current_ = 0;
  std::vector<BallEntry> out_;
};

// Bounded BFS over G itself.
class VertexBfs {
 public:
  explicit VertexBfs(const Graph& g);
  // Vertices within `radius` hops of v, v excluded, in BFS order.
  const std::vector<Vertex>& run(Vertex v, std::size_t radius);

 private:
  const Graph* g_;
  std::vector<std::uint64_t> mark_;
  std::uint64_t stamp_ = 0;
  std::vector<Vertex> out_, frontier_, next_;
};

// All edges within line distance `radius` of e, including e, sorted by id.
std::vector<EdgeId> ball(const Graph& g, EdgeId e, std::size_t radius);

struct EdgeColoring {
  std::vector<Color> assignment;  // kNoColor marks an uncolored edge
  Color main_palette = 0;         // colors 1..main_palette form the main palette
};

struct ColoringReport {
  bool proper = true;
  std::size_t colors_used = 0;
  std::size_t max_fallback_degree = 0;
  std::optional<std::pair<EdgeId, EdgeId>> conflict;
};

class UncoloredEdgeError : public std::runtime_error {
 public:
  explicit UncoloredEdgeError(EdgeId e);
  EdgeId edge() const { return edge_; }

 private:
  EdgeId edge_;
};

ColoringReport verify_edge_coloring(const Graph& g, const EdgeColoring& col);

// Greedy proper coloring in edge-id order; uses at most 2*maxdeg - 1 colors.
EdgeColoring greedy_edge_coloring(const Graph& g);

struct MatchingPartition {
  std::vector<std::vector<EdgeId>> matchings;
};

// Edges incident to a vertex of U, grouped by base color in ascending color order.
MatchingPartition canonical_matchings(const Graph& g, const EdgeColoring& base, Vertex w,
                                      std::span<const Vertex> U);
// The same without re-checking that `base` is proper; for callers that checked it once.
MatchingPartition canonical_matchings_unchecked(const Graph& g, const EdgeColoring& base, Vertex w,
                                                std::span<const Vertex> U);

// Throws std::invalid_argument naming the first clash if `col` is not proper.
void require_proper(const Graph& g, const EdgeColoring& col, const char* what);

}  // namespace ecol
