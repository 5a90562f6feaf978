#include "ecol/generators.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

#include "ecol/rng.hpp"

namespace ecol {

namespace {

void need(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

std::vector<EdgeId> id_order(std::size_t m) {
  std::vector<EdgeId> order(m);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

GeneratorKind parse_generator_kind(const std::string& name) {
  if (name == "path") return GeneratorKind::path;
  if (name == "cycle") return GeneratorKind::cycle;
  if (name == "star_lb") return GeneratorKind::star_lb;
  if (name == "random_max_deg") return GeneratorKind::random_max_deg;
  if (name == "complete_bipartite") return GeneratorKind::complete_bipartite;
  throw std::invalid_argument("unknown generator kind: " + name);
}

std::string generator_kind_name(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::path: return "path";
    case GeneratorKind::cycle: return "cycle";
    case GeneratorKind::star_lb: return "star_lb";
    case GeneratorKind::random_max_deg: return "random_max_deg";
    case GeneratorKind::complete_bipartite: return "complete_bipartite";
  }
  return "?";
}

Instance generate(const GeneratorSpec& spec) {
  const auto& p = spec.params;
  auto arity = [&](std::size_t k) {
    need(p.size() == k, generator_kind_name(spec.kind) + " takes " + std::to_string(k) + " parameters");
  };
  switch (spec.kind) {
    case GeneratorKind::path: arity(1); return make_path(p[0]);
    case GeneratorKind::cycle: arity(1); return make_cycle(p[0]);
    case GeneratorKind::star_lb: arity(2); return make_star_lb(p[0], p[1]);
    case GeneratorKind::random_max_deg: arity(2); return make_random_max_deg(p[0], p[1], spec.seed);
    case GeneratorKind::complete_bipartite: arity(2); return make_complete_bipartite(p[0], p[1]);
  }
  throw std::invalid_argument("unknown generator kind");
}

Instance make_path(std::size_t n) {
  need(n >= 2, "path needs at least 2 vertices");
  std::vector<Endpoints> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({Vertex(i), Vertex(i + 1)});
  Instance inst{Graph(n, std::move(edges)), id_order(n - 1), {}};
  inst.meta = {{"kind", "path"}, {"n", n}};
  return inst;
}

Instance make_cycle(std::size_t n) {
  need(n >= 3, "cycle needs at least 3 vertices");
  std::vector<Endpoints> edges;
  for (std::size_t i = 0; i < n; ++i) edges.push_back({Vertex(i), Vertex((i + 1) % n)});
  Instance inst{Graph(n, std::move(edges)), id_order(n), {}};
  inst.meta = {{"kind", "cycle"}, {"n", n}};
  return inst;
}

Instance make_star_lb(std::size_t delta, std::size_t reps) {
  need(delta >= 2, "star_lb needs delta >= 2");
  need(reps >= 1, "star_lb needs at least one repetition");
  const std::size_t per_copy = delta * (delta - 1) + delta + 1;
  std::vector<Endpoints> star_edges, connectors;
  std::vector<Vertex> roots, centers;
  for (std::size_t r = 0; r < reps; ++r) {
    const Vertex base = Vertex(r * per_copy);
    const Vertex root = base;
    roots.push_back(root);
    for (std::size_t s = 0; s < delta; ++s) {
      const Vertex center = Vertex(base + 1 + s * delta);
      centers.push_back(center);
      for (std::size_t leaf = 1; leaf < delta; ++leaf) star_edges.push_back({center, Vertex(center + leaf)});
      connectors.push_back({root, center});
    }
  }
  std::vector<Endpoints> edges = star_edges;
  std::vector<EdgeId> connector_ids;
  for (const Endpoints& c : connectors) {
    connector_ids.push_back(EdgeId(edges.size()));
    edges.push_back(c);
  }
  const std::size_t m = edges.size();
  Instance inst{Graph(reps * per_copy, std::move(edges)), id_order(m), {}};
  inst.meta = {{"kind", "star_lb"}, {"delta", delta},     {"reps", reps},
               {"roots", roots},    {"centers", centers}, {"connectors", connector_ids}};
  return inst;
}

Instance make_random_max_deg(std::size_t n, std::size_t delta, std::uint64_t seed) {
  need(delta >= 1, "random_max_deg needs delta >= 1");
  need(delta < n, "random_max_deg needs delta < n");
  Rng rng = keyed_rng({seed, n, delta, 0x67656eULL});
  std::set<std::pair<Vertex, Vertex>> present;
  std::vector<Endpoints> edges;
  std::vector<Vertex> perm(n);
  for (std::size_t layer = 0; layer < delta; ++layer) {
    std::iota(perm.begin(), perm.end(), 0);
    shuffle_in_place(perm, rng);
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      const Vertex a = std::min(perm[i], perm[i + 1]);
      const Vertex b = std::max(perm[i], perm[i + 1]);
      if (present.insert({a, b}).second) edges.push_back({a, b});
    }
  }
  std::vector<EdgeId> order = id_order(edges.size());
  shuffle_in_place(order, rng);
  Instance inst{Graph(n, std::move(edges)), std::move(order), {}};
  inst.meta = {{"kind", "random_max_deg"}, {"n", n}, {"delta", delta}, {"seed", seed}};
  return inst;
}

Instance make_complete_bipartite(std::size_t a, std::size_t b) {
  need(a >= 1 && b >= 1, "complete_bipartite needs both sides non-empty");
  std::vector<Endpoints> edges;
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) edges.push_back({Vertex(i), Vertex(a + j)});
  Instance inst{Graph(a + b, std::move(edges)), std::nullopt, {}};
  inst.meta = {{"kind", "complete_bipartite"}, {"a", a}, {"b", b}};
  return inst;
}

}  // namespace ecol
