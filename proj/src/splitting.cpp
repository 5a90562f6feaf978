#include <algorithm>
#include <cmath>

#include "ecol/distsim.hpp"

namespace ecol {

namespace {

constexpr std::uint32_t kNone = ~std::uint32_t{0};

struct Link {
  std::uint32_t a = 0, b = 0;
};

struct Step {
  std::uint32_t edge = 0;
  bool forward = true;  // traversed from a to b
};

// Euler trails of a multigraph (loops allowed). Odd-degree vertices are joined to
// a virtual vertex and the tours are cut where they pass through it, so every
// trail starts and ends at odd-degree vertices, or is closed.
std::vector<std::vector<Step>> euler_trails(std::size_t nv, std::span<const Link> links) {
  const std::uint32_t hub = static_cast<std::uint32_t>(nv);
  std::vector<Link> all(links.begin(), links.end());
  std::vector<std::uint32_t> deg(nv + 1, 0);
  for (const Link& l : links) {
    ++deg[l.a];
    ++deg[l.b];
  }
  for (std::uint32_t v = 0; v < nv; ++v)
    if (deg[v] % 2) all.push_back({v, hub});
  const std::size_t real = links.size();

  std::vector<std::vector<std::uint32_t>> adj(nv + 1);
  for (std::uint32_t i = 0; i < all.size(); ++i) {
    adj[all[i].a].push_back(i);
    adj[all[i].b].push_back(i);
  }
  std::vector<char> used(all.size(), 0);
  std::vector<std::size_t> ptr(nv + 1, 0);

  std::vector<std::vector<Step>> out;
  struct Frame {
    std::uint32_t v;
    std::uint32_t edge;
    bool forward;
  };
  auto tour_from = [&](std::uint32_t start) {
    std::vector<Frame> stack{{start, kNone, true}};
    std::vector<Frame> circuit;
    while (!stack.empty()) {
      const std::uint32_t v = stack.back().v;
      std::size_t& p = ptr[v];
      while (p < adj[v].size() && used[adj[v][p]]) ++p;
      if (p == adj[v].size()) {
        circuit.push_back(stack.back());
        stack.pop_back();
        continue;
      }
      const std::uint32_t e = adj[v][p];
      used[e] = 1;
      const bool fwd = all[e].a == v;
      stack.push_back({fwd ? all[e].b : all[e].a, e, fwd});
    }
    std::reverse(circuit.begin(), circuit.end());
    std::vector<Step> trail;
    for (const Frame& f : circuit) {
      if (f.edge == kNone) continue;
      if (f.edge >= real) {
        if (!trail.empty()) out.push_back(std::move(trail));
        trail.clear();
        continue;
      }
      trail.push_back({f.edge, f.forward});
    }
    if (!trail.empty()) out.push_back(std::move(trail));
  };
  if (!adj[hub].empty()) tour_from(hub);
  for (std::uint32_t v = 0; v < nv; ++v)
    if (std::any_of(adj[v].begin(), adj[v].end(), [&](std::uint32_t e) { return !used[e]; })) tour_from(v);
  return out;
}

// A walk in G standing for one edge of the current virtual graph.
struct VirtualPath {
  Vertex start = 0, end = 0;
  std::vector<EdgeId> edges;  // in walk order from start
};

void append_walk(const VirtualPath& p, bool from_start, Vertex& at, std::vector<EdgeId>& out) {
  if (from_start) {
    out.insert(out.end(), p.edges.begin(), p.edges.end());
    at = p.end;
  } else {
    out.insert(out.end(), p.edges.rbegin(), p.edges.rend());
    at = p.start;
  }
}

// One recursion level: virtual degree-3 nodes, sinkless orientation, pairing of
// controlled ends, and chaining of paired paths. Returns false if nothing merged.
bool merge_level(const Graph& g, std::vector<VirtualPath>& paths, std::size_t max_len) {
  const std::size_t n = g.num_vertices();
  // ends[v]: (path, side) pairs at v; side 0 is the start.
  std::vector<std::vector<std::uint32_t>> ends(n);
  for (std::uint32_t i = 0; i < paths.size(); ++i) {
    ends[paths[i].start].push_back(2 * i);
    ends[paths[i].end].push_back(2 * i + 1);
  }
  std::vector<std::uint32_t> group_of(2 * paths.size());
  std::uint32_t groups = 0;
  for (Vertex v = 0; v < n; ++v)
    for (std::size_t k = 0; k < ends[v].size(); ++k) {
      if (k % 3 == 0) ++groups;
      group_of[ends[v][k]] = groups - 1;
    }
  std::vector<Link> vlinks(paths.size());
  for (std::uint32_t i = 0; i < paths.size(); ++i) vlinks[i] = {group_of[2 * i], group_of[2 * i + 1]};
  // controlled[end]: the orientation leaves the virtual node at this end.
  std::vector<char> controlled(2 * paths.size(), 0);
  for (const auto& trail : euler_trails(groups, vlinks))
    for (const Step& s : trail) controlled[2 * s.edge + (s.forward ? 0 : 1)] = 1;

  std::vector<std::uint32_t> partner(2 * paths.size(), kNone);
  bool any = false;
  for (Vertex v = 0; v < n; ++v) {
    std::uint32_t pending = kNone;
    for (std::uint32_t end : ends[v]) {
      if (!controlled[end]) continue;
      if (pending == kNone) {
        pending = end;
        continue;
      }
      partner[pending] = end;
      partner[end] = pending;
      pending = kNone;
      any = true;
    }
  }
  if (!any) return false;

  std::vector<VirtualPath> merged;
  std::vector<char> visited(paths.size(), 0);
  // Walks a chain entering path p through `side`; cuts links that would make the
  // walk longer than max_len and queues the far path as a new chain start.
  std::vector<std::uint32_t> starts;
  auto walk = [&](std::uint32_t p, std::uint32_t side) {
    VirtualPath out;
    out.start = side == 0 ? paths[p].start : paths[p].end;
    Vertex at = out.start;
    for (;;) {
      visited[p] = 1;
      append_walk(paths[p], side == 0, at, out.edges);
      const std::uint32_t exit = 2 * p + (1 - side);
      const std::uint32_t nxt = partner[exit];
      if (nxt == kNone) break;
      const std::uint32_t q = nxt / 2;
      if (visited[q] || out.edges.size() + paths[q].edges.size() > max_len) {
        partner[exit] = partner[nxt] = kNone;
        if (!visited[q]) starts.push_back(nxt);
        break;
      }
      p = q;
      side = nxt % 2;
    }
    out.end = at;
    merged.push_back(std::move(out));
  };
  auto drain = [&] {
    while (!starts.empty()) {
      const std::uint32_t end = starts.back();
      starts.pop_back();
      if (!visited[end / 2]) walk(end / 2, end % 2);
    }
  };
  for (std::uint32_t p = 0; p < paths.size(); ++p) {
    if (visited[p]) continue;
    if (partner[2 * p] == kNone) walk(p, 0);
    else if (partner[2 * p + 1] == kNone) walk(p, 1);
    drain();
  }
  // What is left are rings; each is opened at one junction.
  for (std::uint32_t p = 0; p < paths.size(); ++p) {
    if (visited[p]) continue;
    const std::uint32_t back = partner[2 * p];
    partner[2 * p] = partner[back] = kNone;
    walk(p, 0);
    drain();
  }
  paths = std::move(merged);
  return true;
}

}  // namespace

Orientation sinkless_orientation(const Graph& g) {
  std::vector<Link> links;
  links.reserve(g.num_edges());
  for (const Endpoints& ep : g.edge_list()) links.push_back({ep.u, ep.v});
  Orientation o(g.num_edges(), true);
  for (const auto& trail : euler_trails(g.num_vertices(), links))
    for (const Step& s : trail) o[s.edge] = s.forward;
  return o;
}

std::vector<Vertex> find_sinks(const Graph& g, const Orientation& o, std::size_t min_degree) {
  if (o.size() != g.num_edges()) throw std::invalid_argument("orientation does not cover the edges");
  std::vector<Vertex> sinks;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    if (g.degree(v) < min_degree) continue;
    const auto inc = g.incident(v);
    const bool out = std::any_of(inc.begin(), inc.end(), [&](const Incidence& in) {
      return (g.endpoints(in.edge).u == v) == o[in.edge];
    });
    if (!out) sinks.push_back(v);
  }
  return sinks;
}

std::size_t sinkless_rounds_estimate(std::size_t n) {
  return n <= 1 ? 1 : static_cast<std::size_t>(std::ceil(std::log2(double(n))));
}

std::vector<std::int64_t> discrepancies(const Graph& g, std::span<const std::int8_t> sign) {
  std::vector<std::int64_t> sum(g.num_vertices(), 0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const Endpoints ep = g.endpoints(e);
    sum[ep.u] += sign[e];
    sum[ep.v] += sign[e];
  }
  for (auto& x : sum) x = std::abs(x);
  return sum;
}

SplitAssignment degree_split(const Graph& g, double eta, const SplitOptions& options) {
  if (!(eta > 0)) throw std::invalid_argument("degree_split needs eta > 0");
  SplitAssignment out;
  out.eta = eta;
  std::vector<VirtualPath> paths(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) paths[e] = {g.endpoints(e).u, g.endpoints(e).v, {e}};

  // Each level leaves about two thirds of the path ends at a vertex unresolved.
  const std::size_t levels = std::min<std::size_t>(
      options.max_depth, static_cast<std::size_t>(std::ceil(std::log(1.0 / std::min(eta, 1.0)) / std::log(1.5))));
  while (out.depth < levels && merge_level(g, paths, options.max_path_length)) ++out.depth;
  for (const auto& p : paths) out.longest_path = std::max(out.longest_path, p.edges.size());

  // Chain the remaining paths along Euler trails and alternate signs.
  std::vector<Link> links;
  for (const auto& p : paths) links.push_back({p.start, p.end});
  out.sign.assign(g.num_edges(), 0);
  for (const auto& trail : euler_trails(g.num_vertices(), links)) {
    std::int8_t s = 1;
    for (const Step& st : trail) {
      const VirtualPath& p = paths[st.edge];
      auto assign = [&](EdgeId e) {
        out.sign[e] = s;
        s = static_cast<std::int8_t>(-s);
      };
      if (st.forward) std::for_each(p.edges.begin(), p.edges.end(), assign);
      else std::for_each(p.edges.rbegin(), p.edges.rend(), assign);
    }
  }
  out.discrepancy = discrepancies(g, out.sign);
  for (Vertex v = 0; v < g.num_vertices(); ++v)
    out.gamma = std::max(out.gamma, double(out.discrepancy[v]) - eta * double(g.degree(v)));
  return out;
}

Graph edge_subgraph(const Graph& g, std::span<const EdgeId> edges) {
  std::vector<Endpoints> eps;
  eps.reserve(edges.size());
  for (EdgeId e : edges) eps.push_back(g.endpoints(e));
  return Graph(g.num_vertices(), std::move(eps), g.allows_parallel());
}

double split_degree_bound(double delta, double eta, double gamma, std::size_t i) {
  const double q = (1 + eta) / 2;
  double geo = 0, pow = 1;
  for (std::size_t j = 0; j < i; ++j) {
    geo += pow;
    pow *= q;
  }
  return pow * delta + gamma / 2 * geo;
}

DegreeReduction split_to_max_degree(const Graph& g, std::size_t target, double eps, const SplitOptions& options) {
  const std::size_t delta = g.max_degree();
  if (target < 1 || target >= delta)
    throw std::invalid_argument("target degree " + std::to_string(target) + " must be in [1, " + std::to_string(delta) +
                                ")");
  if (!(eps > 0)) throw std::invalid_argument("split_to_max_degree needs eps > 0");
  const double ratio = std::log2(double(delta) / double(target));
  DegreeReduction out;
  out.halvings = static_cast<std::size_t>(std::ceil(ratio - 1e-12));
  out.eta = eps / (2 * ratio);

  std::vector<std::vector<EdgeId>> parts(1);
  parts[0].resize(g.num_edges());
  for (EdgeId e = 0; e < g.num_edges(); ++e) parts[0][e] = e;
  out.levels.push_back({delta, double(delta), 0});
  for (std::size_t i = 1; i <= out.halvings; ++i) {
    std::vector<std::vector<EdgeId>> next;
    SplitLevel level;
    for (const auto& part : parts) {
      const Graph sub = edge_subgraph(g, part);
      const SplitAssignment s = degree_split(sub, out.eta, options);
      level.gamma = std::max(level.gamma, s.gamma);
      std::vector<EdgeId> plus, minus;
      for (EdgeId k = 0; k < part.size(); ++k) (s.sign[k] > 0 ? plus : minus).push_back(part[k]);
      for (auto* half : {&plus, &minus}) {
        level.max_degree = std::max(level.max_degree, edge_subgraph(g, *half).max_degree());
        next.push_back(std::move(*half));
      }
    }
    parts = std::move(next);
    out.levels.push_back(level);
  }
  double gamma = 0;
  for (const auto& l : out.levels) gamma = std::max(gamma, l.gamma);
  for (std::size_t i = 0; i < out.levels.size(); ++i) out.levels[i].bound = split_degree_bound(double(delta), out.eta, gamma, i);
  for (const auto& p : parts) out.sum_max_degree += edge_subgraph(g, p).max_degree();
  out.parts = std::move(parts);
  return out;
}

}  // namespace ecol
