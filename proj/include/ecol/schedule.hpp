#pragma once
// Schedules for running the online procedure many edges at a time: the conflict
// graph, distance-l edge colorings, palette reduction, network decompositions, and
// executors whose output matches a sequential run under the induced order.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecol/graph.hpp"
#include "ecol/slocal.hpp"

namespace ecol {

// Degree bound for the conflict graph. The matching rule pairs e with f through
// a path e,a,b,c,d,f with a and d in one base color class: 2*Delta choices for a,
// Delta for b, Delta for c, at most one d at c's far end, Delta for f, so 2*Delta^4.
// The distance-3 rule adds at most 2*Delta + 2*Delta^2 + 2*Delta^3 <= 8*Delta^3
// edges (each hop leaves through one of two endpoints).
inline std::uint64_t conflict_degree_bound(std::uint64_t delta) {
  return 2 * delta * delta * delta * delta + 8 * delta * delta * delta;
}

enum class Parallelism : std::uint8_t { serial, parallel };

class ConflictGraph {
 public:
  ConflictGraph() = default;
  ConflictGraph(std::vector<std::size_t> offsets, std::vector<EdgeId> adj);

  std::size_t num_nodes() const { return offsets_.size() - 1; }
  std::span<const EdgeId> neighbors(EdgeId e) const { return {adj_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]}; }
  std::size_t degree(EdgeId e) const { return offsets_[e + 1] - offsets_[e]; }
  std::size_t max_degree() const;
  bool adjacent(EdgeId e, EdgeId f) const;

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<EdgeId> adj_;  // sorted per node
};

// Conflict iff line distance <= 3, or some a next to e and d next to f (a != d)
// share a base color and lie within line distance 3 of each other.
ConflictGraph build_conflict_graph(const Graph& g, const EdgeColoring& base, Parallelism par = Parallelism::parallel);
// Degrees only, without storing the adjacency; for graphs too dense to hold it.
std::vector<std::size_t> conflict_degrees(const Graph& g, const EdgeColoring& base,
                                          Parallelism par = Parallelism::parallel);

// Greedy in edge-id order: edges within line distance l get distinct colors.
EdgeColoring distance_l_edge_coloring(const Graph& g, std::size_t l);
// Max over edges of the number of other edges within line distance l.
std::size_t line_power_degree(const Graph& g, std::size_t l);

struct PaletteReduction {
  std::vector<Color> colors;
  std::size_t palette = 0;
  std::size_t rounds = 0;       // color tries
  std::size_t sub_rounds = 0;   // local-minimum iterations across all tries
};

// Round r tries color r at every uncolored node. Among the nodes trying, those
// with the smallest initial color in their trying neighborhood adopt it first;
// the result is the greedy maximal set in ascending initial color.
PaletteReduction reduce_palette(const ConflictGraph& conflict, std::span<const Color> initial,
                                Parallelism par = Parallelism::parallel);

struct Schedule {
  std::vector<std::vector<EdgeId>> classes;
  std::string builder;  // conflict | distance-l | nd
  nlohmann::json params = nlohmann::json::object();
};

// Classes ordered by color; edges in a class by id.
Schedule schedule_from_coloring(std::span<const Color> colors, std::string builder, nlohmann::json params);
nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

// (class index, edge id) order.
std::vector<EdgeId> induced_order(const Schedule& s);

class ScheduleConflictError : public std::invalid_argument {
 public:
  ScheduleConflictError(std::size_t cls, EdgeId e, EdgeId f);
  std::size_t class_index() const { return cls_; }
  EdgeId first() const { return e_; }
  EdgeId second() const { return f_; }

 private:
  std::size_t cls_;
  EdgeId e_, f_;
};

struct ExecuteOptions {
  Parallelism par = Parallelism::parallel;
  // Relation the classes must be independent in: the conflict graph if given,
  // else line distance <= `distance` (default: the algorithm's locality).
  const ConflictGraph* conflict = nullptr;
  std::optional<std::size_t> distance;
};

struct ExecutionResult {
  EdgeColoring coloring;
  std::vector<DecisionRecord> decisions;  // in induced order, transitions dropped
  std::size_t division_anomalies = 0;
};

// Throws ScheduleConflictError or invalid_argument before running anything.
void validate_schedule(const Graph& g, const Schedule& s, const ExecuteOptions& options, std::size_t default_distance);

ExecutionResult execute_schedule(const Graph& g, const Schedule& s, const AlgorithmSpec& spec,
                                 const ExecuteOptions& options = {});

struct NetworkDecomposition {
  std::size_t power = 1;                  // clusters are separated in G^power
  std::vector<std::uint32_t> cluster_of;  // per vertex
  std::vector<std::uint32_t> class_of;    // per cluster
  std::vector<std::uint32_t> radius_of;   // per cluster, in G^power hops from its center
  std::size_t num_classes = 0;
  std::size_t num_clusters() const { return class_of.size(); }
  // Diameter bound 2 * max radius.
  std::size_t diameter() const;
};

// Seeded ball carving on G^(l+2).
NetworkDecomposition nd_decompose(const Graph& g, std::size_t l, std::uint64_t seed = 0);

// Empty if valid, else a description of the first problem found.
std::optional<std::string> check_decomposition(const Graph& g, const NetworkDecomposition& nd);

Schedule schedule_from_decomposition(const Graph& g, const NetworkDecomposition& nd);

struct NdExecution {
  ExecutionResult result;
  std::vector<EdgeId> induced_order;
  std::size_t round_estimate = 0;  // analytical: sum over classes of the slowest cluster
};

// Each edge belongs to the cluster of its endpoint with the lower cluster index.
// Classes run in order; clusters of one class are run last-to-first, each
// sequentially in edge-id order.
NdExecution execute_via_nd(const Graph& g, const NetworkDecomposition& nd, const AlgorithmSpec& spec);

}  // namespace ecol
