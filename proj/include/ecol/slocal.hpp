#pragma once
// SLOCAL executor over edges: sequential arrivals, each step restricted to the
// radius-l ball around the arriving edge, with every read logged.

#include <cstdint>
#include <memory>
#include <optional>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecol/derand.hpp"
#include "ecol/graph.hpp"
#include "ecol/instance.hpp"
#include "ecol/online_color.hpp"

namespace ecol {

class LocalityViolation : public std::runtime_error {
 public:
  LocalityViolation(EdgeId center, EdgeId edge, std::size_t radius);
  EdgeId center() const { return center_; }
  EdgeId edge() const { return edge_; }
  std::size_t radius() const { return radius_; }

 private:
  EdgeId center_, edge_;
  std::size_t radius_;
};

struct StepAccess {
  EdgeId center = 0;
  std::uint32_t max_radius = 0;
  std::vector<std::uint64_t> histogram;  // distinct edges read, by line distance
  std::vector<BallEntry> reads;          // kept only when requested
};

struct AccessLog {
  std::vector<StepAccess> steps;
};

// The ball around the current center. Unarrived edges are visible only as
// existing; boundary vertex degrees are never exposed. Reads are checked against
// the ball on the fly and throw LocalityViolation when they leave it.
class LocalView : public ReadGuard {
 public:
  LocalView(const Graph& g, std::size_t radius, bool keep_reads = false);

  void recenter(EdgeId center);
  EdgeId center() const { return center_; }
  std::size_t radius() const { return radius_; }

  void on_edge(EdgeId f) const override;
  void on_vertex(Vertex v) const override;

  // Access record for the current center.
  StepAccess take_step();

 private:
  std::uint32_t locate(EdgeId f) const;

  const Graph* g_;
  std::size_t radius_;
  bool keep_reads_;
  EdgeId center_ = 0;
  // Incremental BFS: layers are expanded only as far as reads require.
  mutable std::vector<std::uint32_t> seen_, dist_, read_;
  mutable std::uint32_t stamp_ = 0;
  mutable std::vector<EdgeId> queue_;
  mutable std::size_t head_ = 0;
  mutable std::uint32_t expanded_ = 0;
  mutable StepAccess step_;
};

enum class AlgorithmKind : std::uint8_t { randomized, deterministic };

std::string algorithm_name(AlgorithmKind k);
AlgorithmKind parse_algorithm(const std::string& s);

struct AlgorithmSpec {
  AlgorithmKind kind = AlgorithmKind::randomized;
  std::uint64_t seed = 0;
  double eps = 0.5;
  std::optional<std::size_t> delta;  // palette size; defaults to the max degree
  ConstantOverrides overrides;
  EnumerationMode mode;              // deterministic only
  bool keep_trace = false;           // deterministic only: Phi trace rows
};

// Minimum locality each algorithm needs.
std::size_t required_locality(AlgorithmKind k);

Params make_params(const Graph& g, const AlgorithmSpec& spec);

// Coloring state and chooser for one run of an algorithm. The deterministic
// chooser gets a potential registry built on a greedy base coloring.
class OnlineRun {
 public:
  OnlineRun(const Graph& g, const AlgorithmSpec& spec);
  OnlineRun(const OnlineRun&) = delete;
  OnlineRun& operator=(const OnlineRun&) = delete;

  const AlgorithmSpec& spec() const { return spec_; }
  ColoringState& state() { return state_; }
  const ColoringState& state() const { return state_; }
  Chooser& chooser() { return *chooser_; }
  const PotentialState* potentials() const { return potentials_.get(); }
  const DerandChooser* derand() const;

 private:
  AlgorithmSpec spec_;
  ColoringState state_;
  std::unique_ptr<PotentialState> potentials_;
  std::unique_ptr<Chooser> chooser_;
};

struct SlocalOptions {
  bool keep_reads = false;
  // Rebuild each arriving edge's weights from its neighbors' tuples and compare
  // with the eagerly maintained row.
  bool check_lazy = true;
};

struct SlocalResult {
  EdgeColoring coloring;
  AccessLog log;
  std::vector<DecisionRecord> decisions;
  std::size_t lazy_checks = 0;
  std::size_t division_anomalies = 0;
  std::optional<InvariantReport> invariants;  // deterministic runs
  std::vector<PhiTraceRow> phi_trace;
};

SlocalResult run_slocal(const Graph& g, std::span<const EdgeId> order, const AlgorithmSpec& spec,
                        std::size_t radius, const SlocalOptions& options = {});

struct LocalityAudit {
  std::size_t max_radius = 0;
  std::vector<std::uint64_t> histogram;
  bool within(std::size_t radius) const { return max_radius <= radius; }
};

LocalityAudit audit_locality(const AccessLog& log);

void write_access_log_jsonl(std::ostream& os, const AccessLog& log);
AccessLog read_access_log_jsonl(std::istream& is);

// Built-in adversaries.
enum class OrderKind : std::uint8_t { id, reverse, star_lb, random };
std::string order_name(OrderKind k);
OrderKind parse_order(const std::string& s);
// star_lb replays the stored order of a star_lb instance: star edges first.
std::vector<EdgeId> make_order(const Instance& inst, OrderKind kind, std::uint64_t seed = 0);

// What one neighbor of the center exposes: whether it arrived and, if so, its tuple.
struct NeighborTuple {
  EdgeId edge = 0;
  bool arrived = false;
  const EdgeRecord* tuple = nullptr;
};

// Neighbor tuples of the view's center, read through the view.
std::vector<NeighborTuple> gather_neighbor_tuples(const ColoringState& s, const LocalView& view);

// Weights of the center rebuilt from its neighbors' tuples in arrival order.
// Throws if an arrived neighbor has no tuple.
std::vector<GridNum> lazy_P_reconstruction(const Params& params, EdgeId center,
                                           std::span<const NeighborTuple> neighbors);

}  // namespace ecol
