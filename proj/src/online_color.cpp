#include "ecol/online_color.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace ecol {

namespace {

constexpr std::uint64_t kRoundingTag = 0x726f756e64ULL;
constexpr std::uint64_t kSampleTag = 0x73616d70ULL;

GridNum grid_power(std::size_t delta) {
  __int128 d = 1;
  for (int i = 0; i < 10; ++i) d *= static_cast<__int128>(delta);
  return static_cast<GridNum>(d);
}

// Applies the effect of `source`'s arrival on one row of weights. `emit` receives
// each change with before > 0.
template <typename Emit>
void update_row(const Params& params, EdgeId source, EdgeId target, Branch branch,
                std::optional<Color> main_color, std::span<const GridNum> source_row,
                const RoundingPlan& rounding, std::span<const GridNum> row, bool* anomaly, Emit&& emit) {
  const GridNum denom = params.denom();
  const Real fden = static_cast<Real>(denom);
  const std::size_t delta = params.delta();
  auto zero = [&](Color c) {
    const GridNum before = row[c - 1];
    if (before != 0) emit(Transition{target, c, before, 0, 0, UpdateKind::zeroed});
  };
  if (branch == Branch::bad_path_color) {
    if (main_color) zero(*main_color);
    return;
  }
  if (branch != Branch::sample_path) return;
  for (Color c = 1; c <= delta; ++c) {
    const GridNum before = row[c - 1];
    if (before == 0) continue;
    if (main_color && *main_color == c) {
      zero(c);
      continue;
    }
    const GridNum src = source_row[c - 1];
    if (src >= denom) {
      if (anomaly) *anomaly = true;
      emit(Transition{target, c, before, 0, 0, UpdateKind::clamped});
      continue;
    }
    const ScaledValue sv = scale_weight(before, src, denom);
    if (before > params.cap_numerator()) {
      emit(Transition{target, c, before, before, sv.exact, UpdateKind::skipped_cap});
    } else if (sv.over_one) {
      emit(Transition{target, c, before, denom, sv.exact, UpdateKind::clamped});
    } else {
      GridNum after = sv.floor;
      if (sv.remainder != 0 && rounding.round_up(source, target, c, sv.remainder, sv.modulus)) ++after;
      emit(Transition{target, c, before, after, static_cast<Real>(after) / fden, UpdateKind::scaled});
    }
  }
}

std::vector<EdgeId> unarrived_neighbors(const ColoringState& s, EdgeId e) {
  std::vector<EdgeId> out;
  s.graph().for_each_line_neighbor(e, [&](EdgeId f) {
    if (!s.arrived(f)) out.push_back(f);
  });
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

Params::Params(std::size_t delta, double eps, const ConstantOverrides& overrides)
    : delta_(delta), eps_(eps), overrides_(overrides) {
  if (delta < 1) throw std::invalid_argument("Delta must be at least 1");
  if (delta > kMaxGridDelta)
    throw std::invalid_argument("Delta above " + std::to_string(kMaxGridDelta) +
                                " does not fit the weight grid");
  if (!(eps > 0 && eps < 1)) throw std::invalid_argument("eps must lie in (0, 1)");
  c_eps_ = overrides.c_eps.value_or(10.0);
  c_A_ = overrides.c_A.value_or(4.0);
  c_K_ = overrides.c_K.value_or(35.0 * c_A_ * c_A_);
  alpha_ = overrides.alpha.value_or(eps * eps * eps / 100.0);
  const double d = static_cast<double>(delta);
  A_ = c_A_ / (eps * eps * d);
  bad_threshold_ = 2.0 * c_K_ * eps * d;
  dangerous_threshold_ = alpha_ * d;
  denom_ = grid_power(delta);
  const Real fden = static_cast<Real>(denom_);
  const Real cap = static_cast<Real>(A_) * fden;
  cap_num_ = cap >= fden ? denom_ : static_cast<GridNum>(cap);
  const Real init = (1 - static_cast<Real>(eps)) * fden / static_cast<Real>(delta);
  init_num_ = static_cast<GridNum>(init + Real(0.5));
}

double Params::regime_floor(std::size_t n) const {
  const double logn = std::log(std::max<double>(2.0, static_cast<double>(n)));
  return c_eps_ * std::pow(std::sqrt(logn) / static_cast<double>(delta_), 1.0 / 16.0);
}

std::string branch_name(Branch b) {
  switch (b) {
    case Branch::bad_path_mark: return "bad_path_mark";
    case Branch::bad_path_color: return "bad_path_color";
    case Branch::mark_z_ge_1: return "mark_z_ge_1";
    case Branch::sample_path: return "sample_path";
  }
  return "?";
}

Branch parse_branch(const std::string& s) {
  for (Branch b : {Branch::bad_path_mark, Branch::bad_path_color, Branch::mark_z_ge_1, Branch::sample_path})
    if (branch_name(b) == s) return b;
  throw std::invalid_argument("unknown branch: " + s);
}

std::string line_tag_name(LineTag t) {
  switch (t) {
    case LineTag::color: return "color";
    case LineTag::color_bad: return "color_bad";
    case LineTag::greedy: return "greedy";
  }
  return "?";
}

RoundingPlan RoundingPlan::keyed(std::uint64_t seed) {
  RoundingPlan p;
  p.keyed_ = true;
  p.seed_ = seed;
  return p;
}

RoundingPlan RoundingPlan::explicit_bits(std::vector<RoundingBit> bits) {
  RoundingPlan p;
  std::sort(bits.begin(), bits.end(), [](const RoundingBit& a, const RoundingBit& b) {
    return std::tie(a.target, a.color) < std::tie(b.target, b.color);
  });
  p.bits_ = std::move(bits);
  return p;
}

bool RoundingPlan::round_up(EdgeId source, EdgeId target, Color c, GridNum remainder, GridNum modulus) const {
  if (keyed_) {
    const std::uint64_t word = mix_keys({seed_, source, target, c, kRoundingTag});
    return bounded(word, static_cast<std::uint64_t>(modulus)) < static_cast<std::uint64_t>(remainder);
  }
  auto it = std::lower_bound(bits_.begin(), bits_.end(), std::make_pair(target, c),
                             [](const RoundingBit& b, const std::pair<EdgeId, Color>& key) {
                               return std::tie(b.target, b.color) < std::tie(key.first, key.second);
                             });
  if (it == bits_.end() || it->target != target || it->color != c)
    throw std::logic_error("rounding plan of edge " + std::to_string(source) + " has no direction for (" +
                           std::to_string(target) + ", " + std::to_string(c) + ")");
  return it->up;
}

ScaledValue scale_weight(GridNum before, GridNum source, GridNum denom) {
  if (source >= denom) throw std::domain_error("scale-up by 1/(1 - P) with P = 1");
  ScaledValue out;
  const __int128 num = static_cast<__int128>(before) * denom;
  const __int128 q = denom - source;
  out.modulus = static_cast<GridNum>(q);
  out.exact = static_cast<Real>(before) / static_cast<Real>(q);
  const __int128 fl = num / q;
  const __int128 rem = num % q;
  out.over_one = fl > denom || (fl == denom && rem > 0);
  out.floor = out.over_one ? denom : static_cast<GridNum>(fl);
  out.remainder = out.over_one ? 0 : static_cast<GridNum>(rem);
  return out;
}

ColoringState::ColoringState(const Graph& g, const Params& params)
    : g_(&g),
      params_(params),
      p_(g.num_edges() * params.delta(), params.initial_numerator()),
      badness_(g.num_vertices(), 0),
      baddeg_(g.num_vertices(), 0),
      arrived_(g.num_edges(), 0),
      records_(g.num_edges()) {
  if (g.max_degree() > params.delta())
    throw std::invalid_argument("graph has maximum degree " + std::to_string(g.max_degree()) +
                                " above Delta = " + std::to_string(params.delta()));
}

__int128 ColoringState::Z(EdgeId e) const {
  __int128 z = 0;
  for (GridNum x : P(e)) z += x;
  return z;
}

const EdgeRecord& ColoringState::record(EdgeId e) const {
  g_->check_edge(e);
  if (!arrived(e)) throw std::logic_error("edge " + std::to_string(e) + " has not arrived");
  touch(e);
  return records_[e];
}

EdgeColoring ColoringState::coloring() const {
  EdgeColoring out;
  out.main_palette = static_cast<Color>(delta());
  out.assignment.resize(g_->num_edges());
  for (EdgeId e = 0; e < g_->num_edges(); ++e) out.assignment[e] = color(e);
  return out;
}

void ColoringState::finish_arrival(EdgeId e, EdgeRecord rec) {
  records_[e] = std::move(rec);
  arrived_[e] = 1;
}

ColoringState init_state(const Graph& g, const Params& params) { return ColoringState(g, params); }

Classification classify_arrival(const ColoringState& s, EdgeId e) {
  s.graph().check_edge(e);
  const Endpoints ep = s.graph().endpoints(e);
  Classification cls;
  cls.u_bad = s.is_bad(ep.u);
  cls.v_bad = s.is_bad(ep.v);
  if (cls.u_bad || cls.v_bad) {
    const auto row = s.P(e);
    auto first = std::find_if(row.begin(), row.end(), [](GridNum x) { return x > 0; });
    if (first == row.end() || s.is_dangerous(ep.u) || s.is_dangerous(ep.v)) {
      cls.branch = Branch::bad_path_mark;
    } else {
      cls.branch = Branch::bad_path_color;
      cls.bad_color = static_cast<Color>(first - row.begin()) + 1;
    }
    return cls;
  }
  cls.branch = s.Z(e) > s.params().denom() ? Branch::mark_z_ge_1 : Branch::sample_path;
  return cls;
}

Outcome sample_color(const ColoringState& s, EdgeId e, Rng& rng) {
  const GridNum denom = s.params().denom();
  if (s.Z(e) > denom)
    throw std::logic_error("sampling edge " + std::to_string(e) + " whose weights sum above 1");
  const auto draw = static_cast<GridNum>(draw_below(rng, static_cast<std::uint64_t>(denom)));
  GridNum acc = 0;
  const auto row = s.P(e);
  for (std::size_t i = 0; i < row.size(); ++i) {
    acc += row[i];
    if (draw < acc) return Outcome{static_cast<Color>(i + 1)};
  }
  return Outcome{};
}

std::vector<Transition> preview_updates(const ColoringState& s, EdgeId e, const Classification& cls,
                                        const Outcome& outcome, const RoundingPlan& rounding) {
  std::vector<Transition> out;
  const auto src = s.P(e);
  for (EdgeId f : unarrived_neighbors(s, e)) {
    if (f == e) continue;
    update_row(s.params(), e, f, cls.branch, cls.branch == Branch::bad_path_color ? std::optional<Color>(cls.bad_color) : outcome.color,
               src, rounding, s.P(f), nullptr, [&](const Transition& tr) { out.push_back(tr); });
  }
  return out;
}

std::vector<Transition> apply_updates(ColoringState& s, EdgeId e, const Classification& cls,
                                      const Outcome& outcome, const RoundingPlan& rounding) {
  std::vector<Transition> out;
  std::vector<GridNum> src(s.P(e).begin(), s.P(e).end());
  const std::optional<Color> main =
      cls.branch == Branch::bad_path_color ? std::optional<Color>(cls.bad_color) : outcome.color;
  for (EdgeId f : unarrived_neighbors(s, e)) {
    if (f == e) continue;
    bool anomaly = false;
    update_row(s.params(), e, f, cls.branch, main, src, rounding, s.P(f), &anomaly,
               [&](const Transition& tr) { out.push_back(tr); });
    if (anomaly) s.note_anomaly();
  }
  for (const Transition& tr : out) s.set_P(tr.edge, tr.color, tr.after);
  return out;
}

std::vector<RoundingBit> rounding_slots(const ColoringState& s, EdgeId e, const Classification& cls,
                                        const Outcome& outcome) {
  std::vector<RoundingBit> out;
  if (cls.branch != Branch::sample_path) return out;
  const Params& p = s.params();
  const auto src = s.P(e);
  for (EdgeId f : unarrived_neighbors(s, e)) {
    if (f == e) continue;
    const auto row = s.P(f);
    for (Color c = 1; c <= p.delta(); ++c) {
      const GridNum before = row[c - 1];
      if (before == 0 || before > p.cap_numerator() || src[c - 1] >= p.denom()) continue;
      if (outcome.color && *outcome.color == c) continue;
      const ScaledValue sv = scale_weight(before, src[c - 1], p.denom());
      if (!sv.over_one && sv.remainder != 0) out.push_back({f, c, false});
    }
  }
  return out;
}

Color greedy_fallback(const ColoringState& s, EdgeId e) {
  std::vector<Color> used;
  s.graph().for_each_line_neighbor(e, [&](EdgeId f) {
    const Color c = s.color(f);
    if (c > s.delta()) used.push_back(c);
  });
  std::sort(used.begin(), used.end());
  Color c = static_cast<Color>(s.delta()) + 1;
  for (Color u : used) {
    if (u == c) ++c;
    else if (u > c) break;
  }
  return c;
}

Decision RandomChooser::choose(const ColoringState& s, EdgeId e, const Classification& cls) {
  Rng rng = keyed_rng({seed_, e, kSampleTag});
  return Decision{cls, sample_color(s, e, rng), RoundingPlan::keyed(seed_)};
}

Decision decide(const ColoringState& s, EdgeId e, Chooser& chooser) {
  const Classification cls = classify_arrival(s, e);
  if (cls.branch == Branch::sample_path) {
    Decision d = chooser.choose(s, e, cls);
    d.cls = cls;
    return d;
  }
  Decision d;
  d.cls = cls;
  if (cls.branch == Branch::bad_path_color) d.outcome.color = cls.bad_color;
  return d;
}

DecisionRecord commit_at(ColoringState& s, EdgeId e, const Decision& d, bool keep_transitions, std::uint32_t t) {
  s.graph().check_edge(e);
  if (s.arrived(e)) throw std::logic_error("edge " + std::to_string(e) + " arrived twice");
  const Graph& g = s.graph();
  const Endpoints ep = g.endpoints(e);

  DecisionRecord out;
  out.edge = e;
  EdgeRecord& rec = out.rec;
  rec.t = t;
  rec.branch = d.cls.branch;
  rec.u_bad = d.cls.u_bad;
  rec.v_bad = d.cls.v_bad;
  rec.p_before.assign(s.P(e).begin(), s.P(e).end());
  rec.rounding = d.rounding;
  if (d.cls.branch == Branch::sample_path || d.cls.branch == Branch::bad_path_color) rec.main_color = d.outcome.color;

  std::vector<Transition> trs = apply_updates(s, e, d.cls, d.outcome, d.rounding);
  if (keep_transitions) out.transitions = std::move(trs);

  const bool bottom = d.cls.branch == Branch::sample_path && !d.outcome.color;
  if (d.cls.branch == Branch::mark_z_ge_1 || bottom) {
    s.bump_badness(ep.u);
    s.bump_badness(ep.v);
  }
  if (d.cls.u_bad) s.bump_baddeg(ep.v);
  if (d.cls.v_bad) s.bump_baddeg(ep.u);

  if (d.cls.branch == Branch::sample_path && d.outcome.color) {
    rec.color = *d.outcome.color;
    rec.tag = LineTag::color;
  } else if (d.cls.branch == Branch::bad_path_color) {
    rec.color = d.cls.bad_color;
    rec.tag = LineTag::color_bad;
  } else {
    rec.color = greedy_fallback(s, e);
    rec.tag = LineTag::greedy;
    rec.marked = true;
  }
  s.advance_clock_to(std::max(s.clock(), t));
  s.finish_arrival(e, rec);
  return out;
}

DecisionRecord commit(ColoringState& s, EdgeId e, const Decision& d, bool keep_transitions) {
  return commit_at(s, e, d, keep_transitions, s.clock() + 1);
}

DecisionRecord process_edge(ColoringState& s, EdgeId e, Chooser& chooser) {
  s.graph().check_edge(e);
  if (s.arrived(e)) throw std::logic_error("edge " + std::to_string(e) + " arrived twice");
  const Decision d = decide(s, e, chooser);
  DecisionRecord rec = commit(s, e, d, chooser.wants_transitions());
  chooser.observe(s, rec);
  return rec;
}

std::vector<GridNum> replay_weights(const Params& params, EdgeId e,
                                    std::span<const std::pair<EdgeId, const EdgeRecord*>> neighbors) {
  std::vector<std::pair<EdgeId, const EdgeRecord*>> order(neighbors.begin(), neighbors.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second->t < b.second->t; });
  std::vector<GridNum> row(params.delta(), params.initial_numerator());
  for (const auto& [g, rec] : order) {
    std::vector<Transition> trs;
    update_row(params, g, e, rec->branch, rec->main_color, rec->p_before, rec->rounding, row, nullptr,
               [&](const Transition& tr) { trs.push_back(tr); });
    for (const Transition& tr : trs) row[tr.color - 1] = tr.after;
  }
  return row;
}

}  // namespace ecol
