#pragma once
// Pessimistic-estimator potentials over the martingales of the online procedure, and
// the deterministic chooser that never lets their sum increase.

#include <array>
#include <bitset>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecol/graph.hpp"
#include "ecol/online_color.hpp"
#include "ecol/real.hpp"

namespace ecol {

// exp((4 lambda / (S^2 N)) * (X - (lambda / 2) * (1 + t / N)))
Real phi(Real X, Real t, Real lambda, Real S, Real N);
Real log_phi(Real X, Real t, Real lambda, Real S, Real N);

struct PhiParams {
  Real lambda = 1;
  Real S = 1;
  Real N = 1;
  Real rate() const { return 4 * lambda / (S * S * N); }
  // Exponent charged for one non-trivial step: 2 lambda^2 / (S^2 N^2).
  Real step_charge() const { return 2 * lambda * lambda / (S * S * N * N); }
};

enum class MartingaleKind : std::uint8_t { Q, K, negL, H, X };
enum class Family : std::uint8_t { few_bad_colors, few_bad_neighbors, bad_vertex_prop };
inline constexpr std::size_t kFamilies = 3;

std::string martingale_kind_name(MartingaleKind k);
std::string family_name(Family f);

using ColorSet = std::bitset<kMaxGridDelta + 2>;

struct TrackedMartingale {
  MartingaleKind kind = MartingaleKind::Q;
  Family family = Family::few_bad_colors;
  Vertex w = 0;                   // Q: the vertex whose edges form U_w
  std::vector<Vertex> U;          // H, X
  std::vector<Color> C;           // Q, K, negL, X
  ColorSet color_mask;
  std::vector<EdgeId> M;          // K, negL
  PhiParams params;
  Real initial = 0;
  Real value = 0;
  std::uint64_t steps = 0;
  std::uint64_t multiplicity = 1;
  std::vector<Vertex> anchors;    // every anchor vertex that registered this term
  Real phi_now = 0;               // phi at the current value and step count
};

struct EnumerationMode {
  bool exact = true;
  std::size_t budget = 1'000'000;  // exact mode: cap on registered terms before merging
  std::size_t k = 0;               // restricted mode: subsets drawn per family and anchor
  std::uint64_t seed = 0;

  static EnumerationMode exact_mode(std::size_t budget = 1'000'000) { return {true, budget, 0, 0}; }
  static EnumerationMode restricted(std::size_t k, std::uint64_t seed) { return {false, 0, k, seed}; }
};

class EnumerationBudgetError : public std::runtime_error {
 public:
  EnumerationBudgetError(std::size_t budget, std::size_t needed);
  std::size_t budget() const { return budget_; }

 private:
  std::size_t budget_;
};

class EstimatorBreach : public std::runtime_error {
 public:
  EstimatorBreach(const std::string& what, std::string dump)
      : std::runtime_error(what), dump_(std::move(dump)) {}
  const std::string& dump() const { return dump_; }

 private:
  std::string dump_;
};

class StepBudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Set sizes after max(1, floor(.)) and, for colors, a cap at Delta.
struct SetSizes {
  std::size_t few_bad_colors_C = 1;
  std::size_t few_bad_neighbors_U = 1;
  std::size_t few_bad_neighbors_M = 1;
  std::size_t prop_C = 1;
  std::size_t prop_U = 1;
  std::size_t prop_M = 1;
};
SetSizes set_sizes(const Params& params);

struct PotentialOptions {
  EnumerationMode mode;
  // Evaluate every martingale on every arrival and record the ones that changed
  // outside their declared support. Quadratic; meant for small audits.
  bool audit_all = false;
};

struct SupportViolation {
  std::size_t martingale = 0;
  EdgeId edge = 0;
};

class PotentialState {
 public:
  const Graph& graph() const { return *g_; }
  const Params& params() const { return params_; }
  const std::vector<TrackedMartingale>& martingales() const { return terms_; }
  std::size_t registered_terms() const { return registered_; }
  const SetSizes& sizes() const { return sizes_; }

  Real phi() const { return phi_; }
  Real phi_initial() const { return phi0_; }
  const std::array<Real, kFamilies>& family_phi() const { return family_phi_; }

  std::span<const std::uint32_t> affected_by(EdgeId e) const {
    return {index_.data() + offsets_[e], offsets_[e + 1] - offsets_[e]};
  }
  // prod over arrived g at w of (1 - P_gc before g arrived).
  Real pi(Vertex w, Color c) const { return pi_[std::size_t(w) * params_.delta() + (c - 1)]; }

  const std::vector<SupportViolation>& support_violations() const { return violations_; }
  bool auditing() const { return options_.audit_all; }

  // Edges whose arrival may change the term, sorted.
  std::vector<EdgeId> declared_support(std::size_t idx) const;

 private:
  friend PotentialState register_potentials(const Graph&, const EdgeColoring&, const Params&,
                                            const PotentialOptions&);
  friend void update_potentials(PotentialState&, const ColoringState&, const DecisionRecord&);

  PotentialState(const Graph& g, const Params& p) : g_(&g), params_(p) {}

  const Graph* g_;
  Params params_;
  PotentialOptions options_;
  SetSizes sizes_;
  std::vector<TrackedMartingale> terms_;
  std::size_t registered_ = 0;
  std::vector<std::size_t> offsets_;
  std::vector<std::uint32_t> index_;
  std::vector<Real> pi_;
  Real phi_ = 0;
  Real phi0_ = 0;
  std::array<Real, kFamilies> family_phi_{};
  std::vector<SupportViolation> violations_;
};

PotentialState register_potentials(const Graph& g, const EdgeColoring& base, const Params& params,
                                   const PotentialOptions& options = {});

// What an arrival does, seen from the potentials. Before commit the state holds
// the pre-arrival rows; after commit it holds the post-arrival rows. Both give the
// same increments because unchanged entries read the same either way.
struct StepView {
  const ColoringState* state = nullptr;
  EdgeId edge = 0;
  Branch branch = Branch::sample_path;
  std::optional<Color> main_color;
  bool u_bad = false;
  bool v_bad = false;
  std::span<const GridNum> p_edge;            // pre-arrival row of the arriving edge
  std::span<const Transition> transitions;    // sorted by (edge, color)
};

struct Increment {
  Real delta = 0;
  bool step = false;  // the step counter advances
};

Increment martingale_increment(const PotentialState& ps, const TrackedMartingale& m, const StepView& v);

// Change of one term's contribution to Phi under the increment.
Real term_delta(const TrackedMartingale& m, const Increment& inc);

// Exact change of Phi if `e` were processed with `outcome` and `rounding`.
Real potential_delta(const PotentialState& ps, const ColoringState& s, EdgeId e, const Outcome& outcome,
                     const RoundingPlan& rounding);

struct CandidateScore {
  Outcome outcome;
  Real delta = 0;
};

struct ArgminChoice {
  Outcome outcome;
  RoundingPlan rounding;
  Real delta = 0;
  std::vector<CandidateScore> candidates;
};

inline constexpr double kTieTolerance = 1e-30;

ArgminChoice choose_color_argmin(const PotentialState& ps, const ColoringState& s, EdgeId e);

void update_potentials(PotentialState& ps, const ColoringState& s, const DecisionRecord& rec);

// Phi summed afresh from each term's current value and step count.
Real phi_from_terms(const PotentialState& ps);

struct InvariantReport {
  Real phi = 0;
  bool small_potential = false;     // (i)
  std::size_t max_capped_colors = 0;
  bool few_bad_colors = true;       // (ii)
  std::size_t max_bad_neighbors = 0;
  bool few_bad_neighbors = true;    // (iii)
  std::size_t max_empty_after_bad = 0;
  bool bad_vertex_property = true;  // (iv)
};

InvariantReport check_invariants(const PotentialState& ps, const ColoringState& s);

struct PhiTraceRow {
  std::uint32_t t = 0;
  EdgeId edge = 0;
  std::string outcome;
  Real phi_before = 0;
  Real phi_after = 0;
  std::array<Real, kFamilies> family{};
};

void write_phi_trace_csv(std::ostream& os, const std::vector<PhiTraceRow>& rows);

// Chooser backed by a potential registry: argmin on sampling arrivals, potential
// updates after every commit.
class DerandChooser : public Chooser {
 public:
  explicit DerandChooser(PotentialState& ps, bool keep_trace = false) : ps_(&ps), keep_trace_(keep_trace) {}
  Decision choose(const ColoringState& s, EdgeId e, const Classification& cls) override;
  void observe(const ColoringState& s, const DecisionRecord& rec) override;
  bool wants_transitions() const override { return true; }

  const std::vector<PhiTraceRow>& trace() const { return trace_; }
  const PotentialState& potentials() const { return *ps_; }

 private:
  PotentialState* ps_;
  bool keep_trace_;
  std::vector<PhiTraceRow> trace_;
};

}  // namespace ecol
