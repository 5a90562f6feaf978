#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "ecol/generators.hpp"
#include "ecol/graph.hpp"
#include "ecol/instance.hpp"
#include "ecol/rng.hpp"
#include "oracles.hpp"

using namespace ecol;

namespace {

Graph triangle() { return Graph(3, {{0, 1}, {1, 2}, {0, 2}}); }

std::size_t dist_of(const LineDistance& d) { return std::get<std::size_t>(d); }

// Small random graphs for the property tests: random edge subsets of K_n.
Graph random_graph(std::uint64_t seed, std::size_t n, double density) {
  Rng rng = keyed_rng({seed, 0x7465737467ULL});
  std::vector<Endpoints> edges;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b)
      if (draw_unit(rng) < density) edges.push_back({a, b});
  return Graph(n, std::move(edges));
}

}  // namespace

TEST_CASE("line distance on a path") {
  Graph g = make_path(4).graph;  // u-v-w-x
  CHECK(dist_of(line_distance(g, 0, 1)) == 1);
  CHECK(dist_of(line_distance(g, 0, 2)) == 2);
  CHECK(dist_of(line_distance(g, 1, 1)) == 0);
}

TEST_CASE("line distance across components is unreachable") {
  Graph g(4, {{0, 1}, {2, 3}});
  CHECK(std::holds_alternative<Unreachable>(line_distance(g, 0, 1)));
  CHECK_THROWS_AS(line_distance(g, 0, 7), std::out_of_range);
}

TEST_CASE("line distance is a metric matching the explicit line graph") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Graph g = random_graph(seed, 9, 0.25);
    const auto ref = oracle::line_distances(g);
    const std::size_t m = g.num_edges();
    for (EdgeId a = 0; a < m; ++a)
      for (EdgeId b = 0; b < m; ++b) {
        const LineDistance d = line_distance(g, a, b);
        if (ref[a][b] < 0) {
          CHECK(!is_reachable(d));
          continue;
        }
        REQUIRE(is_reachable(d));
        CHECK(dist_of(d) == std::size_t(ref[a][b]));
        CHECK(dist_of(line_distance(g, b, a)) == dist_of(d));
        for (EdgeId c = 0; c < m; ++c)
          if (ref[b][c] >= 0) CHECK(ref[a][c] <= ref[a][b] + ref[b][c]);
      }
  }
}

TEST_CASE("ball") {
  Graph path = make_path(13).graph;  // 12 edges
  CHECK(ball(path, 0, 0) == std::vector<EdgeId>{0});
  CHECK(ball(path, 0, 5) == std::vector<EdgeId>{0, 1, 2, 3, 4, 5});

  Graph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  CHECK(ball(star, 2, 1) == std::vector<EdgeId>{0, 1, 2, 3});

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Graph g = random_graph(seed, 10, 0.3);
    if (g.num_edges() == 0) continue;
    const auto ref = oracle::line_distances(g);
    for (std::size_t r = 0; r < 5; ++r) {
      auto small = ball(g, 0, r), big = ball(g, 0, r + 1);
      CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
      std::vector<EdgeId> expect;
      for (EdgeId f = 0; f < g.num_edges(); ++f)
        if (ref[0][f] >= 0 && ref[0][f] <= int(r)) expect.push_back(f);
      CHECK(small == expect);
    }
  }
}

TEST_CASE("verify_edge_coloring") {
  Graph g = triangle();
  auto ok = verify_edge_coloring(g, {{1, 2, 3}, 3});
  CHECK(ok.proper);
  CHECK(ok.colors_used == 3);
  auto bad = verify_edge_coloring(g, {{1, 1, 2}, 3});
  CHECK_FALSE(bad.proper);
  REQUIRE(bad.conflict);
  CHECK(*bad.conflict == std::make_pair(EdgeId(0), EdgeId(1)));
  CHECK_THROWS_AS(verify_edge_coloring(g, {{1, 0, 2}, 3}), UncoloredEdgeError);

  auto fb = verify_edge_coloring(g, {{4, 5, 1}, 3});
  CHECK(fb.max_fallback_degree == 2);
}

TEST_CASE("greedy coloring stays within 2*maxdeg - 1") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = make_random_max_deg(60, 5, seed);
    EdgeColoring col = greedy_edge_coloring(inst.graph);
    auto rep = verify_edge_coloring(inst.graph, col);
    CHECK(rep.proper);
    CHECK(col.main_palette <= 2 * inst.graph.max_degree() - 1);
  }
}

TEST_CASE("canonical matchings") {
  Graph star(4, {{0, 1}, {0, 2}, {0, 3}});
  EdgeColoring base{{1, 2, 3}, 3};
  // U = {0} seen from w = 1: vertex 0 has degree 3.
  std::vector<Vertex> U{0};
  auto part = canonical_matchings(star, base, 1, U);
  CHECK(part.matchings.size() == 3);

  Graph tri = triangle();
  std::vector<Vertex> all{1, 2};
  auto tp = canonical_matchings(tri, {{1, 2, 3}, 3}, 0, all);
  CHECK(tp.matchings.size() == 3);

  CHECK_THROWS_AS(canonical_matchings(tri, {{1, 1, 2}, 3}, 0, all), std::invalid_argument);
  std::vector<Vertex> not_nbr{3};
  CHECK_THROWS(canonical_matchings(star, base, 1, not_nbr));

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Instance inst = make_random_max_deg(30, 4, seed);
    const Graph& g = inst.graph;
    EdgeColoring bc = greedy_edge_coloring(g);
    for (Vertex w = 0; w < g.num_vertices(); ++w) {
      std::vector<Vertex> nb;
      for (const auto& in : g.incident(w)) nb.push_back(in.other);
      auto mp = canonical_matchings(g, bc, w, nb);
      std::multiset<EdgeId> covered;
      for (const auto& m : mp.matchings) {
        for (std::size_t i = 0; i < m.size(); ++i) {
          covered.insert(m[i]);
          for (std::size_t j = i + 1; j < m.size(); ++j) CHECK_FALSE(g.share_endpoint(m[i], m[j]));
        }
      }
      std::set<EdgeId> expect;
      for (Vertex u : nb)
        for (const auto& in : g.incident(u)) expect.insert(in.edge);
      CHECK(covered.size() == expect.size());
      CHECK(std::set<EdgeId>(covered.begin(), covered.end()) == expect);
      CHECK(mp.matchings.size() <= 2 * g.max_degree());
    }
  }
}

TEST_CASE("generators") {
  Instance p = make_path(3);
  CHECK(p.graph.num_edges() == 2);
  CHECK(p.graph.max_degree() == 2);

  Instance lb = make_star_lb(3, 1);
  CHECK(lb.graph.num_edges() == 3 * 2 + 3);
  CHECK(lb.graph.num_vertices() == 3 * 2 + 3 + 1);
  CHECK(lb.graph.max_degree() == 3);
  REQUIRE(lb.arrival_order);
  const auto connectors = lb.meta.at("connectors").get<std::vector<EdgeId>>();
  CHECK(connectors.size() == 3);
  // Connectors arrive last.
  for (std::size_t i = 0; i < connectors.size(); ++i)
    CHECK((*lb.arrival_order)[lb.graph.num_edges() - connectors.size() + i] == connectors[i]);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Instance r = make_random_max_deg(100, 6, seed);
    CHECK(r.graph.max_degree() <= 6);
    CHECK(dump_instance(r) == dump_instance(make_random_max_deg(100, 6, seed)));
  }
  CHECK_THROWS_AS(make_random_max_deg(5, 5, 0), std::invalid_argument);
  CHECK_THROWS_AS(make_path(1), std::invalid_argument);
  CHECK(make_complete_bipartite(3, 4).graph.num_edges() == 12);
}

TEST_CASE("star_lb leaf-edge balls stay off other stars' leaf edges") {
  for (std::size_t delta : {3u, 4u, 5u}) {
    Instance lb = make_star_lb(delta, 1);
    const Graph& g = lb.graph;
    const auto connectors = lb.meta.at("connectors").get<std::vector<EdgeId>>();
    std::set<EdgeId> conn(connectors.begin(), connectors.end());
    auto center_of = [&](EdgeId e) { return std::min(g.endpoints(e).u, g.endpoints(e).v); };
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (conn.count(e)) continue;
      for (EdgeId f : ball(g, e, 2))
        if (!conn.count(f)) CHECK(center_of(f) == center_of(e));
    }
  }
}

TEST_CASE("instance JSON round trip is bit exact") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Instance a = make_random_max_deg(40, 5, seed);
    const std::string text = dump_instance(a);
    Instance b = parse_instance(text);
    CHECK(dump_instance(b) == text);
    CHECK(b.graph.edge_list() == a.graph.edge_list());
  }
  Instance lb = make_star_lb(4, 2);
  CHECK(dump_instance(parse_instance(dump_instance(lb))) == dump_instance(lb));
  CHECK_THROWS(parse_instance(R"({"n":2,"edges":[[0,0]]})"));
  CHECK_THROWS(parse_instance(R"({"n":3,"edges":[[0,1],[1,2]],"arrival_order":[0,0]})"));
}
