#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "ecol/generators.hpp"
#include "ecol/rng.hpp"
#include "ecol/schedule.hpp"
#include "oracles.hpp"

using namespace ecol;

namespace {

AlgorithmSpec randomized(std::uint64_t seed) {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::randomized;
  s.seed = seed;
  return s;
}

AlgorithmSpec deterministic() {
  AlgorithmSpec s;
  s.kind = AlgorithmKind::deterministic;
  return s;
}

std::vector<EdgeRecord> records_of(const std::vector<DecisionRecord>& ds) {
  std::vector<EdgeRecord> out;
  for (const auto& d : ds) out.push_back(d.rec);
  return out;
}

void check_same_as_sequential(const Graph& g, const ExecutionResult& r, const std::vector<EdgeId>& order,
                              const AlgorithmSpec& spec) {
  const SlocalResult seq = run_slocal(g, order, spec, required_locality(spec.kind), {false, false});
  CHECK(r.coloring.assignment == seq.coloring.assignment);
  CHECK(records_of(r.decisions) == records_of(seq.decisions));
  CHECK(oracle::is_proper(g, r.coloring.assignment));
}

std::vector<Color> distinct_colors(std::size_t n) {
  std::vector<Color> c(n);
  for (std::size_t i = 0; i < n; ++i) c[i] = static_cast<Color>(i + 1);
  return c;
}

}  // namespace

TEST_CASE("conflict sets match the pairwise oracle") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance inst = make_random_max_deg(8 + seed % 6, 3 + seed % 3, seed);
    const Graph& g = inst.graph;
    if (g.num_edges() > 30) continue;
    const EdgeColoring base = greedy_edge_coloring(g);
    const auto expect = oracle::conflict_sets(g, base.assignment);
    for (Parallelism par : {Parallelism::serial, Parallelism::parallel}) {
      const ConflictGraph cg = build_conflict_graph(g, base, par);
      const auto deg = conflict_degrees(g, base, par);
      for (EdgeId e = 0; e < g.num_edges(); ++e) {
        const auto nb = cg.neighbors(e);
        CHECK(std::vector<EdgeId>(nb.begin(), nb.end()) == expect[e]);
        CHECK(deg[e] == expect[e].size());
      }
      CHECK(cg.max_degree() <= conflict_degree_bound(g.max_degree()));
    }
  }
}

TEST_CASE("conflict graph on small shapes") {
  const Graph single(2, {{0, 1}});
  CHECK(build_conflict_graph(single, greedy_edge_coloring(single)).max_degree() == 0);
  const Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
  const ConflictGraph cg = build_conflict_graph(tri, greedy_edge_coloring(tri));
  CHECK(cg.adjacent(0, 2));
  CHECK(cg.degree(1) == 2);
  CHECK(conflict_degree_bound(3) == 2 * 81 + 8 * 27);
  EdgeColoring bad = greedy_edge_coloring(tri);
  bad.assignment[1] = bad.assignment[0];
  CHECK_THROWS_AS(build_conflict_graph(tri, bad), std::invalid_argument);
}

TEST_CASE("distance-l coloring on paths") {
  const Graph p5 = make_path(6).graph;  // five edges
  const EdgeColoring c3 = distance_l_edge_coloring(p5, 3);
  CHECK(c3.assignment.front() == c3.assignment.back());
  CHECK(c3.main_palette == 4);
  const EdgeColoring c1 = distance_l_edge_coloring(make_path(10).graph, 1);
  CHECK(c1.main_palette == 2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = make_random_max_deg(40, 4, seed).graph;
    const auto dist = oracle::line_distances(g);
    for (std::size_t l : {1u, 2u, 4u}) {
      const EdgeColoring c = distance_l_edge_coloring(g, l);
      CHECK(c.main_palette <= line_power_degree(g, l) + 1);
      for (EdgeId e = 0; e < g.num_edges(); ++e)
        for (EdgeId f = e + 1; f < g.num_edges(); ++f)
          if (dist[e][f] >= 0 && dist[e][f] <= int(l)) CHECK(c.assignment[e] != c.assignment[f]);
    }
  }
  CHECK_THROWS_AS(distance_l_edge_coloring(p5, 0), std::invalid_argument);
}

TEST_CASE("palette reduction") {
  const ConflictGraph empty(std::vector<std::size_t>(6, 0), {});
  const PaletteReduction r0 = reduce_palette(empty, distinct_colors(5));
  CHECK(r0.palette == 1);
  CHECK(r0.rounds == 1);

  // Star with k leaves around node 0.
  const std::size_t k = 7;
  std::vector<std::size_t> off{0, k};
  std::vector<EdgeId> adj;
  for (EdgeId i = 1; i <= k; ++i) adj.push_back(i);
  for (EdgeId i = 1; i <= k; ++i) {
    adj.push_back(0);
    off.push_back(adj.size());
  }
  const ConflictGraph star(off, adj);
  const PaletteReduction rs = reduce_palette(star, distinct_colors(k + 1));
  CHECK(rs.palette <= k + 1);
  CHECK(rs.palette == 2);

  std::vector<Color> improper = distinct_colors(k + 1);
  improper[3] = improper[0];
  CHECK_THROWS_AS(reduce_palette(star, improper), std::invalid_argument);

  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Graph g = make_random_max_deg(50, 3 + seed % 3, seed).graph;
    const ConflictGraph cg = build_conflict_graph(g, greedy_edge_coloring(g));
    std::vector<Color> init = distinct_colors(g.num_edges());
    Rng rng = keyed_rng({seed});
    shuffle_in_place(init, rng);
    const PaletteReduction a = reduce_palette(cg, init, Parallelism::serial);
    const PaletteReduction b = reduce_palette(cg, init, Parallelism::parallel);
    CHECK(a.colors == b.colors);
    CHECK(a.rounds == b.rounds);
    CHECK(a.palette <= 2 * cg.max_degree() + 1);
    for (EdgeId e = 0; e < cg.num_nodes(); ++e)
      for (EdgeId f : cg.neighbors(e)) CHECK(a.colors[e] != a.colors[f]);
  }
}

TEST_CASE("schedule json round trip and validation") {
  const Graph g = make_path(5).graph;
  const Schedule s = schedule_from_coloring(distance_l_edge_coloring(g, 1).assignment, "distance-l", {{"l", 1}});
  const Schedule back = schedule_from_json(nlohmann::json::parse(schedule_to_json(s).dump()));
  CHECK(back.classes == s.classes);
  CHECK(back.builder == "distance-l");
  CHECK(induced_order(s) == std::vector<EdgeId>{0, 2, 1, 3});
  CHECK_THROWS(schedule_from_json({{"classes", s.classes}, {"builder", "other"}}));

  Schedule bad{{{0, 1}, {2, 3}}, "distance-l", {}};
  CHECK_THROWS_AS(validate_schedule(g, bad, {}, 1), ScheduleConflictError);
  Schedule missing{{{0, 2}}, "distance-l", {}};
  CHECK_THROWS_AS(validate_schedule(g, missing, {}, 1), std::invalid_argument);
  try {
    execute_schedule(g, bad, randomized(1));
    FAIL("expected a conflict");
  } catch (const ScheduleConflictError& e) {
    CHECK(e.first() == 0);
    CHECK(e.second() == 1);
  }
}

TEST_CASE("randomized schedule matches the sequential run") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const Graph g = make_random_max_deg(80, 3 + seed % 5, seed).graph;
    const Schedule s = schedule_from_coloring(distance_l_edge_coloring(g, 1).assignment, "distance-l", {{"l", 1}});
    for (Parallelism par : {Parallelism::serial, Parallelism::parallel}) {
      ExecuteOptions opt;
      opt.par = par;
      check_same_as_sequential(g, execute_schedule(g, s, randomized(seed), opt), induced_order(s), randomized(seed));
    }
  }
}

TEST_CASE("deterministic schedules match the sequential run") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Graph g = make_random_max_deg(30, 3 + seed % 2, seed).graph;
    const Schedule d5 = schedule_from_coloring(distance_l_edge_coloring(g, 5).assignment, "distance-l", {{"l", 5}});
    check_same_as_sequential(g, execute_schedule(g, d5, deterministic()), induced_order(d5), deterministic());

    const ConflictGraph cg = build_conflict_graph(g, greedy_edge_coloring(g));
    const PaletteReduction red = reduce_palette(cg, distinct_colors(g.num_edges()));
    const Schedule sc = schedule_from_coloring(red.colors, "conflict", {{"rounds", red.rounds}});
    ExecuteOptions opt;
    opt.conflict = &cg;
    check_same_as_sequential(g, execute_schedule(g, sc, deterministic(), opt), induced_order(sc), deterministic());
  }
}

TEST_CASE("permuting a class leaves the output unchanged") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Graph g = make_random_max_deg(30, 4, seed).graph;
    const ConflictGraph cg = build_conflict_graph(g, greedy_edge_coloring(g));
    const Schedule s = schedule_from_coloring(reduce_palette(cg, distinct_colors(g.num_edges())).colors, "conflict", {});
    std::vector<EdgeId> permuted;
    Rng rng = keyed_rng({seed, 7});
    for (auto cls : s.classes) {
      shuffle_in_place(cls, rng);
      permuted.insert(permuted.end(), cls.begin(), cls.end());
    }
    const SlocalResult a = run_slocal(g, induced_order(s), deterministic(), 5, {false, false});
    const SlocalResult b = run_slocal(g, permuted, deterministic(), 5, {false, false});
    CHECK(a.coloring.assignment == b.coloring.assignment);
    std::vector<std::optional<Color>> ma(g.num_edges()), mb(g.num_edges());
    for (const auto& d : a.decisions) ma[d.edge] = d.rec.main_color;
    for (const auto& d : b.decisions) mb[d.edge] = d.rec.main_color;
    CHECK(ma == mb);
  }
}

TEST_CASE("network decompositions are valid") {
  const Graph tri(3, {{0, 1}, {1, 2}, {0, 2}});
  const NetworkDecomposition one = nd_decompose(tri, 1, 3);
  CHECK(one.num_classes == 1);
  CHECK(one.num_clusters() == 1);
  CHECK(one.diameter() == 2);

  // Alternating singletons on a path, separated in G itself.
  const Graph path = make_path(9).graph;
  NetworkDecomposition alt;
  alt.power = 1;
  for (Vertex v = 0; v < 9; ++v) {
    alt.cluster_of.push_back(v);
    alt.class_of.push_back(v % 2);
    alt.radius_of.push_back(0);
  }
  alt.num_classes = 2;
  CHECK_FALSE(check_decomposition(path, alt));
  CHECK(alt.diameter() == 0);
  alt.class_of[1] = 0;
  CHECK(check_decomposition(path, alt));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = make_random_max_deg(120, 3 + seed % 3, seed).graph;
    const NetworkDecomposition nd = nd_decompose(g, 1, seed);
    CHECK_FALSE(check_decomposition(g, nd));
    const auto dist = oracle::vertex_distances(g);
    for (Vertex u = 0; u < g.num_vertices(); ++u)
      for (Vertex v = u + 1; v < g.num_vertices(); ++v) {
        const auto cu = nd.cluster_of[u], cv = nd.cluster_of[v];
        if (cu != cv && nd.class_of[cu] == nd.class_of[cv])
          CHECK((dist[u][v] < 0 || dist[u][v] > int(nd.power)));
      }
  }
}

TEST_CASE("execution through a decomposition matches the sequential run") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Graph g = make_random_max_deg(100, 3 + seed % 4, seed).graph;
    const NetworkDecomposition nd = nd_decompose(g, 1, seed);
    const NdExecution r = execute_via_nd(g, nd, randomized(seed));
    check_same_as_sequential(g, r.result, r.induced_order, randomized(seed));
    CHECK(r.round_estimate <= nd.num_classes * (nd.diameter() + 1) * (1 + 2));
    CHECK_THROWS_AS(execute_via_nd(g, nd, deterministic()), std::invalid_argument);
  }
  const Graph g = make_random_max_deg(30, 3, 9).graph;
  const NetworkDecomposition nd = nd_decompose(g, 5, 9);
  const NdExecution r = execute_via_nd(g, nd, deterministic());
  check_same_as_sequential(g, r.result, r.induced_order, deterministic());

  NetworkDecomposition broken = nd;
  if (broken.num_clusters() > 1) {
    std::fill(broken.class_of.begin(), broken.class_of.end(), 0);
    broken.num_classes = 1;
    if (check_decomposition(g, broken)) CHECK_THROWS_AS(execute_via_nd(g, broken, deterministic()), std::invalid_argument);
  }
}

TEST_CASE("singleton clusters reduce to a schedule") {
  const Graph g = make_random_max_deg(60, 4, 2).graph;
  // Singletons colored greedily in G^3.
  const auto dist = oracle::vertex_distances(g);
  NetworkDecomposition nd;
  nd.power = 3;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    std::uint32_t c = 0;
    for (bool clash = true; clash; ++c) {
      clash = false;
      for (Vertex u = 0; u < v; ++u)
        if (nd.class_of[u] == c && dist[u][v] >= 0 && dist[u][v] <= 3) clash = true;
      if (!clash) break;
    }
    nd.cluster_of.push_back(v);
    nd.class_of.push_back(c);
    nd.radius_of.push_back(0);
    nd.num_classes = std::max<std::size_t>(nd.num_classes, c + 1);
  }
  REQUIRE_FALSE(check_decomposition(g, nd));
  const NdExecution viand = execute_via_nd(g, nd, randomized(4));
  // A singleton owns a star of edges; split each star by rank so every class is a
  // set of stars' k-th edges, run in the same order as the decomposition's.
  std::vector<std::vector<EdgeId>> owned(g.num_vertices());
  for (EdgeId e = 0; e < g.num_edges(); ++e) owned[std::min(g.endpoints(e).u, g.endpoints(e).v)].push_back(e);
  Schedule s;
  s.builder = "nd";
  for (std::uint32_t c = 0; c < nd.num_classes; ++c)
    for (std::size_t rank = 0;; ++rank) {
      std::vector<EdgeId> cls;
      for (Vertex v = 0; v < g.num_vertices(); ++v)
        if (nd.class_of[v] == c && rank < owned[v].size()) cls.push_back(owned[v][rank]);
      if (cls.empty()) break;
      s.classes.push_back(cls);
    }
  const ExecutionResult direct = execute_schedule(g, s, randomized(4));
  CHECK(viand.result.coloring.assignment == direct.coloring.assignment);
  const SlocalResult seq = run_slocal(g, induced_order(s), randomized(4), 1, {false, false});
  CHECK(seq.coloring.assignment == direct.coloring.assignment);
}
