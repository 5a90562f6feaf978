#pragma once
// Synchronous message passing with LOCAL/CONGEST bit accounting, identifier
// compression, sinkless orientation, degree splitting, and the CONGEST pipeline.

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecol/graph.hpp"
#include "ecol/slocal.hpp"

namespace ecol {

enum class BandwidthMode : std::uint8_t { local, congest };
std::string mode_name(BandwidthMode m);
BandwidthMode parse_mode(const std::string& s);

struct NetworkConfig {
  BandwidthMode mode = BandwidthMode::congest;
  std::size_t bandwidth_bits = 64;  // per round, per direction of a channel
  std::size_t round_cap = 100000;   // logical rounds
};

// Fields are written as a 6-bit width prefix followed by the value in that many
// bits. bits() is the length of that encoding.
class Message {
 public:
  static constexpr unsigned kPrefixBits = 6;

  void push(std::uint64_t value, unsigned width);
  // Width chosen as the value's bit length (at least 1).
  void push(std::uint64_t value);
  std::size_t bits() const { return bits_; }
  std::size_t num_fields() const;
  std::uint64_t field(std::size_t i) const;
  bool empty() const { return bits_ == 0; }

 private:
  std::uint64_t read(std::size_t pos, unsigned width) const;
  void write(std::uint64_t value, unsigned width);

  std::vector<std::uint64_t> words_;
  std::size_t bits_ = 0;
};

struct Envelope {
  Vertex peer = 0;  // sender on receipt, recipient on send
  Message msg;
};

// One program instance drives every node; per-node state lives in the program,
// indexed by vertex. receive() sees only messages sent to v in the previous round.
class NodeProgram {
 public:
  virtual ~NodeProgram() = default;
  virtual std::vector<Envelope> start(Vertex v) = 0;
  virtual std::vector<Envelope> receive(Vertex v, std::size_t round, std::span<const Envelope> inbox) = 0;
  virtual bool halted(Vertex v) const = 0;
};

struct RoundRow {
  std::size_t round = 0;
  std::size_t max_bits = 0;    // most bits on one directed channel
  std::size_t total_msgs = 0;
  std::size_t physical = 0;    // rounds needed at the configured bandwidth
};

struct RoundTrace {
  std::vector<RoundRow> rows;
  std::size_t logical_rounds = 0;
  std::size_t physical_rounds = 0;
  std::size_t max_channel_bits_total = 0;  // one directed channel, summed over the run
  // histogram[k]: channel-rounds that needed k physical rounds
  std::vector<std::uint64_t> congestion_histogram;
};

class RoundCapError : public std::runtime_error {
 public:
  RoundCapError(std::size_t cap, RoundTrace trace);
  const RoundTrace& trace() const { return trace_; }

 private:
  RoundTrace trace_;
};

// Runs until every node halted and nothing is in flight. Messages to non-neighbors
// throw invalid_argument. Inboxes are ordered by sender.
RoundTrace run_rounds(const Graph& g, NodeProgram& program, const NetworkConfig& config);

void write_trace_csv(std::ostream& os, const RoundTrace& trace);

struct IdMap {
  std::vector<std::uint32_t> ids;  // 0-based
  std::size_t palette = 0;
  unsigned bits = 1;
};

// Greedy coloring of G^(2r) in vertex order: vertices within distance 2r differ.
IdMap compress_ids(const Graph& g, std::size_t r);

// true: edge points from endpoints(e).u to endpoints(e).v.
using Orientation = std::vector<bool>;

// Euler-tour orientation: in and out degree differ by at most one at every
// vertex, so nothing of degree >= 2 is a sink.
Orientation sinkless_orientation(const Graph& g);
// Vertices of degree >= min_degree with no outgoing edge.
std::vector<Vertex> find_sinks(const Graph& g, const Orientation& o, std::size_t min_degree = 3);
// Analytical round cost of the distributed version: ceil(log2 n).
std::size_t sinkless_rounds_estimate(std::size_t n);

struct SplitOptions {
  std::size_t max_path_length = 64;  // stop recursing before virtual paths get longer
  std::size_t max_depth = 32;
};

struct SplitAssignment {
  std::vector<std::int8_t> sign;           // +1 or -1 per edge
  std::vector<std::int64_t> discrepancy;   // |sum of signs| per vertex
  double eta = 0;
  double gamma = 0;  // max over vertices of discrepancy - eta*deg, floored at 0
  std::size_t depth = 0;
  std::size_t longest_path = 1;
};

std::vector<std::int64_t> discrepancies(const Graph& g, std::span<const std::int8_t> sign);

// Vertices are cut into degree-3 virtual nodes, a sinkless orientation of the
// virtual graph hands each vertex the edges it controls, and controlled edges are
// paired into longer virtual paths. The recursion stops after enough levels for
// eta, and the last level's paths are chained along Euler tours and signed
// alternately, which balances every vertex except tour ends.
SplitAssignment degree_split(const Graph& g, double eta, const SplitOptions& options = {});

struct SplitLevel {
  std::size_t max_degree = 0;
  double bound = 0;  // closed-form ceiling for this level
  double gamma = 0;  // worst measured gamma over the splits of this level
};

struct DegreeReduction {
  std::vector<std::vector<EdgeId>> parts;  // edge ids of g
  std::vector<SplitLevel> levels;          // levels[0] is g itself
  std::size_t halvings = 0;
  double eta = 0;
  std::size_t sum_max_degree = 0;
};

// Closed form ((1+eta)/2)^i * delta + gamma/2 * sum_{j<i} ((1+eta)/2)^j.
double split_degree_bound(double delta, double eta, double gamma, std::size_t i);

// ceil(log2(Delta/target)) halvings with eta = eps / (2 log2(Delta/target)).
DegreeReduction split_to_max_degree(const Graph& g, std::size_t target, double eps, const SplitOptions& options = {});

// Subgraph on all of g's vertices with the given edges, in the given order.
Graph edge_subgraph(const Graph& g, std::span<const EdgeId> edges);

struct PipelineOptions {
  double c = 1.0;                        // target degree max(4, ceil(c sqrt(log2 n)))
  std::optional<std::size_t> target;     // overrides the formula
  NetworkConfig network;
  AlgorithmSpec algorithm = [] {
    AlgorithmSpec s;
    s.kind = AlgorithmKind::deterministic;
    return s;
  }();
  std::size_t push_radius = 2;           // hops a tuple travels from its edge's endpoints
  // Parts of degree above exact_max_degree run the deterministic chooser in
  // restricted mode with this many subsets per family and anchor.
  std::size_t exact_max_degree = 6;
  std::size_t restricted_k = 4;
};

struct PipelineStep {
  std::size_t part = 0;
  std::size_t step = 0;
  std::size_t edges = 0;
  std::size_t max_channel_bits = 0;
  std::size_t logical_rounds = 0;
  std::size_t physical_rounds = 0;
};

struct PipelineResult {
  EdgeColoring coloring;
  bool small_degree = false;  // colored greedily without splitting
  std::size_t target_degree = 0;
  std::size_t max_part_degree = 0;
  DegreeReduction reduction;
  std::vector<PipelineStep> steps;
  RoundTrace trace;           // all push rounds, concatenated
  unsigned id_bits = 0;
  unsigned value_bits = 0;
  std::uint64_t envelope_bits = 0;  // 4 * Delta'^3 * (id bits + value bits)
  std::size_t schedule_rounds = 0;  // analytical: palette reduction tries
};

std::size_t pipeline_target_degree(std::size_t n, double c);

PipelineResult congest_pipeline(const Graph& g, double eps, const PipelineOptions& options = {});

}  // namespace ecol
