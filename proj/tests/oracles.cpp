#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace oracle {

std::vector<std::vector<int>> line_distances(const Graph& g) {
  const std::size_t m = g.num_edges();
  std::vector<std::vector<char>> adj(m, std::vector<char>(m, 0));
  for (EdgeId a = 0; a < m; ++a)
    for (EdgeId b = 0; b < m; ++b) {
      if (a == b) continue;
      const auto x = g.endpoints(a), y = g.endpoints(b);
      if (x.u == y.u || x.u == y.v || x.v == y.u || x.v == y.v) adj[a][b] = 1;
    }
  std::vector<std::vector<int>> dist(m, std::vector<int>(m, -1));
  for (EdgeId s = 0; s < m; ++s) {
    std::deque<EdgeId> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      const EdgeId a = q.front();
      q.pop_front();
      for (EdgeId b = 0; b < m; ++b)
        if (adj[a][b] && dist[s][b] < 0) {
          dist[s][b] = dist[s][a] + 1;
          q.push_back(b);
        }
    }
  }
  return dist;
}

std::vector<std::vector<int>> vertex_distances(const Graph& g) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<int>> dist(n, std::vector<int>(n, -1));
  for (ecol::Vertex s = 0; s < n; ++s) {
    std::deque<ecol::Vertex> q{s};
    dist[s][s] = 0;
    while (!q.empty()) {
      const auto a = q.front();
      q.pop_front();
      for (const auto& in : g.incident(a))
        if (dist[s][in.other] < 0) {
          dist[s][in.other] = dist[s][a] + 1;
          q.push_back(in.other);
        }
    }
  }
  return dist;
}

std::vector<std::vector<EdgeId>> conflict_sets(const Graph& g, const std::vector<Color>& base) {
  const std::size_t m = g.num_edges();
  const auto ld = line_distances(g);
  auto near = [&](EdgeId a, EdgeId b) { return ld[a][b] >= 0 && ld[a][b] <= 3; };
  std::vector<std::vector<EdgeId>> out(m);
  for (EdgeId e = 0; e < m; ++e)
    for (EdgeId f = 0; f < m; ++f) {
      if (e == f) continue;
      bool conflict = near(e, f);
      for (EdgeId a = 0; a < m && !conflict; ++a) {
        if (ld[e][a] != 1) continue;
        for (EdgeId d = 0; d < m && !conflict; ++d)
          if (ld[f][d] == 1 && a != d && base[a] == base[d] && near(a, d)) conflict = true;
      }
      if (conflict) out[e].push_back(f);
    }
  return out;
}

std::vector<Color> local_greedy(const Graph& g, const std::vector<EdgeId>& order, std::size_t radius) {
  const auto ld = line_distances(g);
  std::vector<Color> col(g.num_edges(), 0);
  for (EdgeId e : order) {
    std::set<Color> seen;
    for (EdgeId f = 0; f < g.num_edges(); ++f)
      if (ld[e][f] == 1 && ld[e][f] <= int(radius) && col[f]) seen.insert(col[f]);
    Color c = 1;
    while (seen.count(c)) ++c;
    col[e] = c;
  }
  return col;
}

bool is_proper(const Graph& g, const std::vector<Color>& col) {
  for (EdgeId a = 0; a < g.num_edges(); ++a)
    for (EdgeId b = a + 1; b < g.num_edges(); ++b)
      if (g.share_endpoint(a, b) && col[a] == col[b]) return false;
  return true;
}

}  // namespace oracle
