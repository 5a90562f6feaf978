#include <algorithm>
#include <numeric>

#include "ecol/rng.hpp"
#include "ecol/schedule.hpp"

namespace ecol {

namespace {

constexpr std::uint32_t kUnassigned = ~std::uint32_t{0};

std::vector<std::uint32_t> edge_owner(const Graph& g, const NetworkDecomposition& nd) {
  std::vector<std::uint32_t> owner(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Endpoints ep = g.endpoints(e);
    owner[e] = std::min(nd.cluster_of[ep.u], nd.cluster_of[ep.v]);
  }
  return owner;
}

}  // namespace

std::size_t NetworkDecomposition::diameter() const {
  std::uint32_t r = 0;
  for (std::uint32_t x : radius_of) r = std::max(r, x);
  return 2 * std::size_t(r);
}

NetworkDecomposition nd_decompose(const Graph& g, std::size_t l, std::uint64_t seed) {
  const std::size_t n = g.num_vertices();
  NetworkDecomposition nd;
  nd.power = l + 2;
  nd.cluster_of.assign(n, kUnassigned);

  // Adjacency of G^power.
  std::vector<std::vector<Vertex>> power_adj(n);
  {
    VertexBfs ball(g);
    for (Vertex v = 0; v < n; ++v) power_adj[v] = ball.run(v, nd.power);
  }

  std::vector<char> active(n, 0), in_ball(n, 0);
  std::size_t remaining = n;
  std::vector<Vertex> ball, layer, next;
  for (std::uint32_t cls = 0; remaining > 0; ++cls) {
    std::vector<Vertex> order;
    for (Vertex v = 0; v < n; ++v)
      if (nd.cluster_of[v] == kUnassigned) order.push_back(v);
    Rng rng = keyed_rng({seed, cls, 0x6e64ULL});
    shuffle_in_place(order, rng);
    for (Vertex v : order) active[v] = 1;

    for (Vertex center : order) {
      if (!active[center]) continue;
      // Grow while the next ball more than doubles.
      ball.assign(1, center);
      layer.assign(1, center);
      in_ball[center] = 1;
      std::uint32_t radius = 0;
      for (;;) {
        next.clear();
        for (Vertex x : layer)
          for (Vertex y : power_adj[x])
            if (active[y] && !in_ball[y]) {
              in_ball[y] = 1;
              next.push_back(y);
            }
        if (ball.size() + next.size() > 2 * ball.size()) {
          ball.insert(ball.end(), next.begin(), next.end());
          layer.swap(next);
          ++radius;
          continue;
        }
        // The shell waits for a later class.
        for (Vertex y : next) {
          in_ball[y] = 0;
          active[y] = 0;
        }
        break;
      }
      const std::uint32_t id = static_cast<std::uint32_t>(nd.class_of.size());
      nd.class_of.push_back(cls);
      nd.radius_of.push_back(radius);
      for (Vertex x : ball) {
        nd.cluster_of[x] = id;
        active[x] = 0;
        in_ball[x] = 0;
      }
      remaining -= ball.size();
    }
    nd.num_classes = cls + 1;
  }
  return nd;
}

std::optional<std::string> check_decomposition(const Graph& g, const NetworkDecomposition& nd) {
  const std::size_t n = g.num_vertices();
  if (nd.cluster_of.size() != n) return "cluster_of has " + std::to_string(nd.cluster_of.size()) + " entries";
  if (nd.radius_of.size() != nd.class_of.size()) return std::string("radius_of and class_of differ in size");
  for (Vertex v = 0; v < n; ++v)
    if (nd.cluster_of[v] >= nd.num_clusters()) return "vertex " + std::to_string(v) + " has no cluster";
  for (std::uint32_t c : nd.class_of)
    if (c >= nd.num_classes) return "cluster class " + std::to_string(c) + " out of range";
  VertexBfs ball(g);
  for (Vertex v = 0; v < n; ++v) {
    const std::uint32_t cv = nd.cluster_of[v];
    for (Vertex u : ball.run(v, nd.power)) {
      const std::uint32_t cu = nd.cluster_of[u];
      if (cu != cv && nd.class_of[cu] == nd.class_of[cv])
        return "clusters " + std::to_string(cv) + " and " + std::to_string(cu) + " of class " +
               std::to_string(nd.class_of[cv]) + " are within distance " + std::to_string(nd.power) +
               " (vertices " + std::to_string(v) + ", " + std::to_string(u) + ")";
    }
  }
  return std::nullopt;
}

Schedule schedule_from_decomposition(const Graph& g, const NetworkDecomposition& nd) {
  const std::vector<std::uint32_t> owner = edge_owner(g, nd);
  Schedule s;
  s.builder = "nd";
  s.params = {{"power", nd.power}, {"clusters", nd.num_clusters()}, {"diameter", nd.diameter()}};
  s.classes.resize(nd.num_classes);
  for (EdgeId e = 0; e < g.num_edges(); ++e) s.classes[nd.class_of[owner[e]]].push_back(e);
  std::erase_if(s.classes, [](const auto& c) { return c.empty(); });
  return s;
}

NdExecution execute_via_nd(const Graph& g, const NetworkDecomposition& nd, const AlgorithmSpec& spec) {
  const std::size_t need = required_locality(spec.kind) + 2;
  if (nd.power < need)
    throw std::invalid_argument("decomposition separates clusters at distance " + std::to_string(nd.power) +
                                ", the algorithm needs " + std::to_string(need));
  if (auto problem = check_decomposition(g, nd)) throw std::invalid_argument("invalid decomposition: " + *problem);

  const std::vector<std::uint32_t> owner = edge_owner(g, nd);
  NdExecution out;
  out.induced_order = induced_order(schedule_from_decomposition(g, nd));
  std::vector<std::uint32_t> time(g.num_edges());
  for (std::size_t i = 0; i < out.induced_order.size(); ++i) time[out.induced_order[i]] = static_cast<std::uint32_t>(i + 1);

  std::vector<std::vector<EdgeId>> by_cluster(nd.num_clusters());
  for (EdgeId e = 0; e < g.num_edges(); ++e) by_cluster[owner[e]].push_back(e);
  std::vector<std::vector<std::uint32_t>> clusters_of_class(nd.num_classes);
  for (std::uint32_t c = 0; c < nd.num_clusters(); ++c) clusters_of_class[nd.class_of[c]].push_back(c);

  OnlineRun run(g, spec);
  ColoringState& state = run.state();
  Chooser& chooser = run.chooser();
  std::vector<DecisionRecord> records(g.num_edges());
  for (const auto& clusters : clusters_of_class) {
    std::size_t slowest = 0;
    for (auto it = clusters.rbegin(); it != clusters.rend(); ++it) {
      const auto& edges = by_cluster[*it];
      if (edges.empty()) continue;
      slowest = std::max<std::size_t>(slowest, (2 * std::size_t(nd.radius_of[*it]) + 1) * nd.power);
      for (EdgeId e : edges) {
        const Decision d = decide(state, e, chooser);
        DecisionRecord rec = commit_at(state, e, d, chooser.wants_transitions(), time[e]);
        chooser.observe(state, rec);
        rec.transitions = {};
        records[time[e] - 1] = std::move(rec);
      }
    }
    out.round_estimate += slowest;
  }
  out.result.decisions = std::move(records);
  out.result.coloring = state.coloring();
  out.result.division_anomalies = state.division_anomalies();
  return out;
}

}  // namespace ecol
