#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "ecol/distsim.hpp"
#include "ecol/generators.hpp"
#include "oracles.hpp"

using namespace ecol;

namespace {

// Vertex 0 holds a token; whoever first receives it passes it on.
class Broadcast : public NodeProgram {
 public:
  explicit Broadcast(std::size_t n) : has_(n, false) { has_[0] = true; }
  std::vector<Envelope> start(Vertex v) override { return v == 0 ? pass(v, n_of(v)) : std::vector<Envelope>{}; }
  std::vector<Envelope> receive(Vertex v, std::size_t, std::span<const Envelope> inbox) override {
    if (inbox.empty() || has_[v]) return {};
    has_[v] = true;
    return pass(v, n_of(v));
  }
  bool halted(Vertex) const override { return true; }
  void attach(const Graph& g) { g_ = &g; }
  std::vector<bool> has_;

 private:
  std::vector<Vertex> n_of(Vertex v) const {
    std::vector<Vertex> out;
    for (const Incidence& in : g_->incident(v))
      if (!has_[in.other]) out.push_back(in.other);
    return out;
  }
  std::vector<Envelope> pass(Vertex, const std::vector<Vertex>& to) const {
    std::vector<Envelope> out;
    for (Vertex u : to) {
      Message m;
      m.push(1, 1);
      out.push_back({u, m});
    }
    return out;
  }
  const Graph* g_ = nullptr;
};

// Every node floods the set of inputs it has seen for `rounds` rounds.
class Flood : public NodeProgram {
 public:
  Flood(const Graph& g, std::vector<std::uint64_t> input, std::size_t rounds)
      : g_(g), input_(std::move(input)), rounds_(rounds), seen_(g.num_vertices()), done_(g.num_vertices(), false) {}

  std::vector<Envelope> start(Vertex v) override {
    seen_[v][v] = input_[v];
    return share(v);
  }
  std::vector<Envelope> receive(Vertex v, std::size_t round, std::span<const Envelope> inbox) override {
    for (const Envelope& env : inbox)
      for (std::size_t f = 0; f + 1 < env.msg.num_fields(); f += 2)
        seen_[v][static_cast<Vertex>(env.msg.field(f))] = env.msg.field(f + 1);
    if (round >= rounds_) {
      done_[v] = true;
      return {};
    }
    return share(v);
  }
  bool halted(Vertex v) const override { return done_[v]; }
  const std::map<Vertex, std::uint64_t>& seen(Vertex v) const { return seen_[v]; }

 private:
  std::vector<Envelope> share(Vertex v) const {
    Message m;
    for (const auto& [k, x] : seen_[v]) {
      m.push(k);
      m.push(x);
    }
    std::vector<Envelope> out;
    for (const Incidence& in : g_.incident(v)) out.push_back({in.other, m});
    return out;
  }
  const Graph& g_;
  std::vector<std::uint64_t> input_;
  std::size_t rounds_;
  std::vector<std::map<Vertex, std::uint64_t>> seen_;
  std::vector<bool> done_;
};

// Vertex 0 sends one message of `fields` 64-bit fields to vertex 1.
class Burst : public NodeProgram {
 public:
  explicit Burst(std::size_t fields) : fields_(fields) {}
  std::vector<Envelope> start(Vertex v) override {
    if (v != 0) return {};
    Message m;
    for (std::size_t i = 0; i < fields_; ++i) m.push(0, 58);  // 64 bits per field
    return {{1, m}};
  }
  std::vector<Envelope> receive(Vertex, std::size_t, std::span<const Envelope>) override { return {}; }
  bool halted(Vertex) const override { return true; }

 private:
  std::size_t fields_;
};

class Chatter : public NodeProgram {
 public:
  std::vector<Envelope> start(Vertex) override { return {}; }
  std::vector<Envelope> receive(Vertex, std::size_t, std::span<const Envelope>) override { return {}; }
  bool halted(Vertex) const override { return false; }
};

class WrongAddress : public NodeProgram {
 public:
  std::vector<Envelope> start(Vertex v) override {
    if (v != 0) return {};
    Message m;
    m.push(1);
    return {{2, m}};
  }
  std::vector<Envelope> receive(Vertex, std::size_t, std::span<const Envelope>) override { return {}; }
  bool halted(Vertex) const override { return true; }
};

Graph circulant(std::size_t n, std::size_t half_degree) {
  std::vector<Endpoints> edges;
  for (Vertex v = 0; v < n; ++v)
    for (std::size_t k = 1; k <= half_degree; ++k) edges.push_back({v, static_cast<Vertex>((v + k) % n)});
  return Graph(n, edges);
}

}  // namespace

TEST_CASE("message encoding") {
  Message m;
  m.push(5);
  m.push(0, 10);
  m.push(1023, 10);
  CHECK(m.bits() == (6 + 3) + (6 + 10) + (6 + 10));
  CHECK(m.num_fields() == 3);
  CHECK(m.field(0) == 5);
  CHECK(m.field(2) == 1023);
  CHECK_THROWS_AS(m.push(4, 2), std::invalid_argument);
  CHECK_THROWS_AS(m.push(0, 0), std::invalid_argument);
  CHECK_THROWS_AS(m.field(3), std::out_of_range);
  CHECK(parse_mode("local") == BandwidthMode::local);
  CHECK_THROWS(parse_mode("wide"));
}

TEST_CASE("broadcast along a path") {
  for (std::size_t n : {2u, 5u, 17u}) {
    const Graph g = make_path(n).graph;
    Broadcast b(n);
    b.attach(g);
    const RoundTrace t = run_rounds(g, b, {});
    CHECK(t.logical_rounds == n - 1);
    CHECK(std::all_of(b.has_.begin(), b.has_.end(), [](bool x) { return x; }));
    for (const RoundRow& r : t.rows) CHECK(r.total_msgs == 1);
  }
}

TEST_CASE("bandwidth accounting") {
  const Graph g = make_path(2).graph;
  NetworkConfig cfg;
  cfg.bandwidth_bits = 64;
  Burst three(3);
  RoundTrace t = run_rounds(g, three, cfg);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0].max_bits == 192);
  CHECK(t.rows[0].physical == 3);
  CHECK(t.physical_rounds == 3);
  CHECK(t.congestion_histogram[3] == 1);

  Burst partial(2);
  cfg.bandwidth_bits = 100;
  t = run_rounds(g, partial, cfg);
  CHECK(t.physical_rounds == 2);  // ceil(128 / 100)

  cfg.mode = BandwidthMode::local;
  Burst big(10);
  CHECK(run_rounds(g, big, cfg).physical_rounds == 1);
}

TEST_CASE("flooding travels one hop per round") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Graph g = make_random_max_deg(60, 3, seed).graph;
    const auto dist = oracle::vertex_distances(g);
    std::vector<std::uint64_t> input(g.num_vertices());
    for (Vertex v = 0; v < g.num_vertices(); ++v) input[v] = 100 + v;
    Flood f(g, input, 5);
    const RoundTrace t = run_rounds(g, f, {BandwidthMode::local, 64, 100});
    CHECK(t.logical_rounds == 5);
    for (Vertex v = 0; v < g.num_vertices(); ++v) {
      std::set<Vertex> expect;
      for (Vertex u = 0; u < g.num_vertices(); ++u)
        if (dist[v][u] >= 0 && dist[v][u] <= 5) expect.insert(u);
      std::set<Vertex> got;
      for (const auto& [u, x] : f.seen(v)) got.insert(u);
      CHECK(got == expect);
    }
    // Changing an input outside the radius does not change what v knows.
    Vertex far = 0;
    while (far < g.num_vertices() && (dist[0][far] >= 0 && dist[0][far] <= 5)) ++far;
    if (far < g.num_vertices()) {
      std::vector<std::uint64_t> changed = input;
      changed[far] = 7;
      Flood f2(g, changed, 5);
      run_rounds(g, f2, {BandwidthMode::local, 64, 100});
      CHECK(f2.seen(0) == f.seen(0));
    }
  }
}

TEST_CASE("round cap and addressing errors") {
  const Graph g = make_path(3).graph;
  Chatter c;
  try {
    run_rounds(g, c, {BandwidthMode::congest, 64, 7});
    FAIL("expected the cap");
  } catch (const RoundCapError& e) {
    CHECK(e.trace().rows.size() == 7);
  }
  WrongAddress w;
  CHECK_THROWS_AS(run_rounds(g, w, {}), std::invalid_argument);
}

TEST_CASE("trace csv") {
  const Graph g = make_path(4).graph;
  Broadcast b(4);
  b.attach(g);
  std::ostringstream os;
  write_trace_csv(os, run_rounds(g, b, {}));
  CHECK(os.str() == "# ecol round trace v1\nround,max_bits,total_msgs\n1,7,1\n2,7,1\n3,7,1\n");
}

TEST_CASE("compressed ids") {
  const IdMap p = compress_ids(make_path(9).graph, 1);
  CHECK(p.palette == 3);
  CHECK(p.ids[0] == p.ids[3]);  // distance 3 = 2r + 1
  CHECK(p.bits == 2);
  CHECK_THROWS(compress_ids(make_path(3).graph, 0));
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const Graph g = make_random_max_deg(80, 4, seed).graph;
    const auto dist = oracle::vertex_distances(g);
    for (std::size_t r : {1u, 2u}) {
      const IdMap ids = compress_ids(g, r);
      std::size_t power_degree = 0;
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        std::size_t d = 0;
        for (Vertex u = 0; u < g.num_vertices(); ++u) {
          if (u == v || dist[v][u] < 0 || dist[v][u] > int(2 * r)) continue;
          ++d;
          CHECK(ids.ids[u] != ids.ids[v]);
        }
        power_degree = std::max(power_degree, d);
      }
      CHECK(ids.bits <= unsigned(std::ceil(std::log2(double(power_degree + 1)))));
    }
  }
}

TEST_CASE("sinkless orientation") {
  const Graph cyc = make_cycle(7).graph;
  CHECK(find_sinks(cyc, sinkless_orientation(cyc), 1).empty());
  const Graph single = make_complete_bipartite(1, 1).graph;  // degree 1 is exempt
  CHECK(find_sinks(single, sinkless_orientation(single)).empty());
  const Graph complete(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  CHECK(find_sinks(complete, sinkless_orientation(complete)).empty());
  // Internal nodes of degree 3, leaves exempt.
  std::vector<Endpoints> tree;
  for (Vertex v = 1; v < 22; ++v) tree.push_back({(v - 1) / 3, v});
  const Graph t(22, tree);
  CHECK(find_sinks(t, sinkless_orientation(t)).empty());
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Graph g = make_random_max_deg(200, 3 + seed, seed).graph;
    CHECK(find_sinks(g, sinkless_orientation(g), 2).empty());
  }
  Orientation all_in(complete.num_edges());
  for (EdgeId e = 0; e < complete.num_edges(); ++e) all_in[e] = complete.endpoints(e).v == 0;
  CHECK(std::find(find_sinks(complete, all_in).begin(), find_sinks(complete, all_in).end(), 0) !=
        find_sinks(complete, all_in).end());
  CHECK(sinkless_rounds_estimate(1024) == 10);
}

TEST_CASE("degree splitting") {
  const Graph edge(2, {{0, 1}});
  const SplitAssignment one = degree_split(edge, 0.25);
  CHECK(one.discrepancy == std::vector<std::int64_t>{1, 1});

  const Graph even = make_cycle(12).graph;
  const SplitAssignment c = degree_split(even, 0.25);
  CHECK(*std::max_element(c.discrepancy.begin(), c.discrepancy.end()) == 0);

  for (double eta : {0.1, 0.25, 0.5}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      const Graph g = make_random_max_deg(300, 16, seed).graph;
      const SplitAssignment s = degree_split(g, eta);
      CHECK(s.gamma <= 4);
      CHECK(s.longest_path <= SplitOptions{}.max_path_length);
      CHECK(s.discrepancy == discrepancies(g, s.sign));
      for (Vertex v = 0; v < g.num_vertices(); ++v) {
        const auto inc = g.incident(v);
        std::int64_t sum = 0;
        for (const Incidence& in : inc) sum += s.sign[in.edge];
        CHECK(std::abs(sum) == s.discrepancy[v]);
        CHECK(double(s.discrepancy[v]) <= eta * double(g.degree(v)) + s.gamma + 1e-9);
      }
      CHECK(std::all_of(s.sign.begin(), s.sign.end(), [](std::int8_t x) { return x == 1 || x == -1; }));
    }
  }
  CHECK_THROWS(degree_split(edge, 0));
}

TEST_CASE("splitting down to a target degree") {
  const Graph g8 = circulant(40, 4);  // 8-regular
  const DegreeReduction once = split_to_max_degree(g8, 4, 0.5);
  CHECK(once.halvings == 1);
  CHECK(once.parts.size() == 2);

  const Graph g16 = circulant(64, 8);
  const DegreeReduction r = split_to_max_degree(g16, 4, 0.5);
  CHECK(r.halvings == 2);
  REQUIRE(r.parts.size() == 4);
  for (std::size_t i = 0; i < r.levels.size(); ++i) CHECK(double(r.levels[i].max_degree) <= r.levels[i].bound + 5);
  const double q = (1 + r.eta) / 2;
  CHECK(double(r.levels.back().max_degree) <= q * q * 16 + 5);
  std::vector<int> seen(g16.num_edges(), 0);
  std::size_t sum = 0;
  for (const auto& p : r.parts) {
    for (EdgeId e : p) ++seen[e];
    sum += edge_subgraph(g16, p).max_degree();
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int x) { return x == 1; }));
  CHECK(sum == r.sum_max_degree);
  CHECK(split_degree_bound(16, 0, 0, 2) == doctest::Approx(4));
  CHECK_THROWS(split_to_max_degree(g16, 16, 0.5));
}

TEST_CASE("pipeline below the split target is greedy") {
  const Graph g = make_random_max_deg(100, 4, 3).graph;
  const PipelineResult r = congest_pipeline(g, 0.5);
  CHECK(r.small_degree);
  CHECK(oracle::is_proper(g, r.coloring.assignment));
  const Color top = *std::max_element(r.coloring.assignment.begin(), r.coloring.assignment.end());
  CHECK(top <= 2 * g.max_degree() - 1);
  CHECK(pipeline_target_degree(1 << 16, 1.0) == 4);
  CHECK(pipeline_target_degree(1 << 16, 3.0) == 12);
}

TEST_CASE("pipeline on a degree-12 graph") {
  const Graph g = make_random_max_deg(90, 12, 5).graph;
  PipelineOptions opt;
  opt.target = 6;
  opt.network.bandwidth_bits = 128;
  const PipelineResult r = congest_pipeline(g, 0.5, opt);
  CHECK_FALSE(r.small_degree);
  CHECK(oracle::is_proper(g, r.coloring.assignment));
  CHECK(r.reduction.parts.size() == 2);
  CHECK(!r.steps.empty());
  for (const PipelineStep& s : r.steps) CHECK(s.max_channel_bits <= r.envelope_bits);
  for (const RoundRow& row : r.trace.rows)
    CHECK(row.physical == std::max<std::size_t>(1, (row.max_bits + 127) / 128));
}
