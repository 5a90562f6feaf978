#pragma once
// The online (1+eps)Delta edge-coloring procedure with a pluggable color chooser.
//
// Palette weights live on the grid of multiples of 1/Delta^10 and are stored as
// integer numerators, so every comparison against 1 or against the cap A is exact.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecol/graph.hpp"
#include "ecol/real.hpp"
#include "ecol/rng.hpp"

namespace ecol {

using GridNum = std::int64_t;

// Largest palette for which Delta^10 fits the 63-bit numerator type.
inline constexpr std::size_t kMaxGridDelta = 78;

struct ConstantOverrides {
  std::optional<double> c_eps;
  std::optional<double> c_A;
  std::optional<double> c_K;
  std::optional<double> alpha;
};

class Params {
 public:
  Params(std::size_t delta, double eps, const ConstantOverrides& overrides = {});

  std::size_t delta() const { return delta_; }
  double eps() const { return eps_; }
  double c_eps() const { return c_eps_; }
  double c_A() const { return c_A_; }
  double c_K() const { return c_K_; }
  double alpha() const { return alpha_; }
  double A() const { return A_; }
  double bad_threshold() const { return bad_threshold_; }
  double dangerous_threshold() const { return dangerous_threshold_; }
  const ConstantOverrides& overrides() const { return overrides_; }

  GridNum denom() const { return denom_; }
  // P <= A iff numerator <= cap_numerator().
  GridNum cap_numerator() const { return cap_num_; }
  GridNum initial_numerator() const { return init_num_; }

  // eps >= c_eps * (sqrt(log n) / Delta)^(1/16), the regime the guarantees assume.
  double regime_floor(std::size_t n) const;
  bool in_valid_regime(std::size_t n) const { return eps_ >= regime_floor(n); }

 private:
  std::size_t delta_;
  double eps_;
  double c_eps_, c_A_, c_K_, alpha_;
  double A_, bad_threshold_, dangerous_threshold_;
  GridNum denom_, cap_num_, init_num_;
  ConstantOverrides overrides_;
};

enum class Branch : std::uint8_t { bad_path_mark, bad_path_color, mark_z_ge_1, sample_path };
enum class LineTag : std::uint8_t { color, color_bad, greedy };

std::string branch_name(Branch b);
Branch parse_branch(const std::string& s);
std::string line_tag_name(LineTag t);

struct Classification {
  Branch branch = Branch::sample_path;
  Color bad_color = kNoColor;  // set for bad_path_color
  bool u_bad = false;
  bool v_bad = false;
  bool endpoints_good() const { return !u_bad && !v_bad; }
};

// A sampled outcome: a main-palette color, or nothing (the bottom symbol).
struct Outcome {
  std::optional<Color> color;
  bool operator==(const Outcome&) const = default;
};

struct RoundingBit {
  EdgeId target = 0;
  Color color = kNoColor;
  bool up = false;
  bool operator==(const RoundingBit&) const = default;
};

// How a scaled weight that falls between two grid points is rounded. The keyed form
// rounds up with probability remainder/modulus, preserving the expectation; the
// explicit form carries directions chosen by the deterministic chooser.
class RoundingPlan {
 public:
  RoundingPlan() = default;
  static RoundingPlan keyed(std::uint64_t seed);
  static RoundingPlan explicit_bits(std::vector<RoundingBit> bits);

  bool is_keyed() const { return keyed_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<RoundingBit>& bits() const { return bits_; }

  bool round_up(EdgeId source, EdgeId target, Color c, GridNum remainder, GridNum modulus) const;

  bool operator==(const RoundingPlan&) const = default;

 private:
  bool keyed_ = false;
  std::uint64_t seed_ = 0;
  std::vector<RoundingBit> bits_;  // sorted by (target, color)
};

enum class UpdateKind : std::uint8_t { zeroed, scaled, skipped_cap, clamped };

// One change to P_fc caused by an arrival. `bar` is the uncapped scaled value used
// by the drift-separated matching martingale; it equals `after` unless the scale-up
// was skipped or clamped.
struct Transition {
  EdgeId edge = 0;
  Color color = kNoColor;
  GridNum before = 0;
  GridNum after = 0;
  Real bar = 0;
  UpdateKind kind = UpdateKind::scaled;
};

// The tuple an arrived edge leaves behind.
struct EdgeRecord {
  std::uint32_t t = 0;  // 1-based arrival time
  Branch branch = Branch::sample_path;
  std::optional<Color> main_color;  // color drawn or chosen from [Delta]
  Color color = kNoColor;           // final color, fallback colors included
  LineTag tag = LineTag::color;
  bool marked = false;
  bool u_bad = false;
  bool v_bad = false;
  std::vector<GridNum> p_before;
  RoundingPlan rounding;

  bool operator==(const EdgeRecord&) const = default;
};

struct DecisionRecord {
  EdgeId edge = 0;
  EdgeRecord rec;
  std::vector<Transition> transitions;  // empty unless requested
};

// Observer of state reads. Vertex reads stand for reading every edge at the vertex,
// since badness and bad-neighbor counts are derived from incident edges' tuples.
class ReadGuard {
 public:
  virtual ~ReadGuard() = default;
  virtual void on_edge(EdgeId e) const = 0;
  virtual void on_vertex(Vertex v) const = 0;
};

class ColoringState {
 public:
  ColoringState(const Graph& g, const Params& params);

  const Graph& graph() const { return *g_; }
  const Params& params() const { return params_; }
  std::size_t delta() const { return params_.delta(); }
  std::uint32_t clock() const { return clock_; }

  std::span<const GridNum> P(EdgeId e) const {
    touch(e);
    return {p_.data() + std::size_t(e) * delta(), delta()};
  }
  GridNum P(EdgeId e, Color c) const {
    touch(e);
    return p_[std::size_t(e) * delta() + (c - 1)];
  }
  // Sum of the row as a numerator; exact.
  __int128 Z(EdgeId e) const;

  std::uint32_t badness(Vertex v) const {
    touch_vertex(v);
    return badness_[v];
  }
  std::uint32_t baddeg(Vertex v) const {
    touch_vertex(v);
    return baddeg_[v];
  }
  bool is_bad(Vertex v) const { return badness(v) >= params_.bad_threshold(); }
  bool is_dangerous(Vertex v) const { return baddeg(v) >= params_.dangerous_threshold(); }

  bool arrived(EdgeId e) const {
    touch(e);
    return arrived_[e] != 0;
  }
  const EdgeRecord& record(EdgeId e) const;
  Color color(EdgeId e) const { return arrived(e) ? records_[e].color : kNoColor; }

  // Every read through the accessors above is reported to the guard, if one is set.
  void set_guard(const ReadGuard* guard) { guard_ = guard; }
  const ReadGuard* guard() const { return guard_; }
  EdgeColoring coloring() const;

  // Number of scale-ups that hit a weight of exactly 1 on the arriving edge.
  std::size_t division_anomalies() const { return anomalies_; }

  // Low-level mutation used by apply_updates and commit.
  void set_P(EdgeId e, Color c, GridNum v) { p_[std::size_t(e) * delta() + (c - 1)] = v; }
  void note_anomaly() { ++anomalies_; }
  void finish_arrival(EdgeId e, EdgeRecord rec);
  void bump_badness(Vertex v) { ++badness_[v]; }
  void bump_baddeg(Vertex v) { ++baddeg_[v]; }
  void advance_clock_to(std::uint32_t t) { clock_ = t; }

 private:
  void touch(EdgeId e) const {
    if (guard_) guard_->on_edge(e);
  }
  void touch_vertex(Vertex v) const {
    if (guard_) guard_->on_vertex(v);
  }

  const Graph* g_;
  Params params_;
  std::vector<GridNum> p_;
  std::vector<std::uint32_t> badness_, baddeg_;
  std::vector<std::uint8_t> arrived_;
  std::vector<EdgeRecord> records_;
  std::uint32_t clock_ = 0;
  std::size_t anomalies_ = 0;
  const ReadGuard* guard_ = nullptr;
};

ColoringState init_state(const Graph& g, const Params& params);

Classification classify_arrival(const ColoringState& s, EdgeId e);

// Draws a color with probability P_ec and bottom with 1 - sum_c P_ec.
Outcome sample_color(const ColoringState& s, EdgeId e, Rng& rng);

// Result of scaling `before` by 1/(1 - source/denom) and rounding per `up`.
struct ScaledValue {
  GridNum floor = 0;
  GridNum remainder = 0;
  GridNum modulus = 1;
  Real exact = 0;     // the unrounded value as a fraction of 1
  bool over_one = false;
};
ScaledValue scale_weight(GridNum before, GridNum source, GridNum denom);

// The changes apply_updates would make, without making them.
std::vector<Transition> preview_updates(const ColoringState& s, EdgeId e, const Classification& cls,
                                        const Outcome& outcome, const RoundingPlan& rounding);
std::vector<Transition> apply_updates(ColoringState& s, EdgeId e, const Classification& cls,
                                      const Outcome& outcome, const RoundingPlan& rounding);

// The scaled entries whose value falls strictly between two grid points, in
// (edge, color) order, each with up = false.
std::vector<RoundingBit> rounding_slots(const ColoringState& s, EdgeId e, const Classification& cls,
                                        const Outcome& outcome);

// Smallest color above Delta not held by an adjacent arrived edge.
Color greedy_fallback(const ColoringState& s, EdgeId e);

struct Decision {
  Classification cls;
  Outcome outcome;
  RoundingPlan rounding;
};

class Chooser {
 public:
  virtual ~Chooser() = default;
  // Called for sample_path arrivals only; returns the outcome and rounding plan.
  virtual Decision choose(const ColoringState& s, EdgeId e, const Classification& cls) = 0;
  // Called after the decision has been committed.
  virtual void observe(const ColoringState& /*s*/, const DecisionRecord& /*rec*/) {}
  virtual bool wants_transitions() const { return false; }
};

// Randomness keyed by (seed, edge-id): the draw for an edge does not depend on the
// arrival order of unrelated edges.
class RandomChooser : public Chooser {
 public:
  explicit RandomChooser(std::uint64_t seed) : seed_(seed) {}
  Decision choose(const ColoringState& s, EdgeId e, const Classification& cls) override;
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Read-only half of process_edge: classification plus the chooser's decision.
Decision decide(const ColoringState& s, EdgeId e, Chooser& chooser);
// Write half: applies the decision, updates badness and baddeg, runs the greedy
// fallback for marked edges and stores the edge's tuple.
DecisionRecord commit(ColoringState& s, EdgeId e, const Decision& d, bool keep_transitions);
// Commit at an explicit arrival time (used by executors that precompute times).
DecisionRecord commit_at(ColoringState& s, EdgeId e, const Decision& d, bool keep_transitions,
                         std::uint32_t t);

DecisionRecord process_edge(ColoringState& s, EdgeId e, Chooser& chooser);

// P values of `e` rebuilt from the tuples of its arrived neighbors, replayed in
// arrival order. `neighbors` holds (edge id, tuple) pairs in any order.
std::vector<GridNum> replay_weights(const Params& params, EdgeId e,
                                    std::span<const std::pair<EdgeId, const EdgeRecord*>> neighbors);

}  // namespace ecol
