#include "ecol/derand.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace ecol {

Real log_phi(Real X, Real t, Real lambda, Real S, Real N) {
  const Real rate = 4 * lambda / (S * S * N);
  return rate * (X - lambda / 2 * (1 + t / N));
}

Real phi(Real X, Real t, Real lambda, Real S, Real N) { return real_exp(log_phi(X, t, lambda, S, N)); }

namespace {

Real term_phi(const TrackedMartingale& m) {
  return phi(m.value - m.initial, static_cast<Real>(m.steps), m.params.lambda, m.params.S, m.params.N);
}

// Before/after of P_fc as seen through the step view.
struct EntryChange {
  GridNum before;
  GridNum after;
  const Transition* tr;
};

const Transition* find_transition(std::span<const Transition> trs, EdgeId f, Color c) {
  auto it = std::lower_bound(trs.begin(), trs.end(), std::pair{f, c}, [](const Transition& t, const std::pair<EdgeId, Color>& k) {
    return t.edge != k.first ? t.edge < k.first : t.color < k.second;
  });
  if (it == trs.end() || it->edge != f || it->color != c) return nullptr;
  return &*it;
}

EntryChange entry(const StepView& v, EdgeId f, Color c) {
  if (const Transition* t = find_transition(v.transitions, f, c)) return {t->before, t->after, t};
  const GridNum x = v.state->P(f, c);
  return {x, x, nullptr};
}

bool colored_branch(Branch b) { return b == Branch::sample_path || b == Branch::bad_path_color; }

bool unarrived_other(const StepView& v, EdgeId f) { return f != v.edge && !v.state->arrived(f); }

bool touches_vertex_set(const Endpoints& ep, const std::vector<Vertex>& U) {
  return std::binary_search(U.begin(), U.end(), ep.u) || std::binary_search(U.begin(), U.end(), ep.v);
}

// Number of endpoints of the arriving edge inside U.
Real endpoints_in(const Endpoints& ep, const std::vector<Vertex>& U) {
  return static_cast<Real>(std::binary_search(U.begin(), U.end(), ep.u)) +
         static_cast<Real>(std::binary_search(U.begin(), U.end(), ep.v));
}

bool adjacent_unarrived_in(const StepView& v, const std::vector<EdgeId>& M) {
  const Graph& g = v.state->graph();
  for (EdgeId f : M)
    if (f != v.edge && g.share_endpoint(f, v.edge) && unarrived_other(v, f)) return true;
  return false;
}

Real z_over(std::span<const GridNum> row, const ColorSet* mask) {
  __int128 z = 0;
  for (std::size_t i = 0; i < row.size(); ++i)
    if (!mask || mask->test(i + 1)) z += row[i];
  return static_cast<Real>(z);
}

}  // namespace

Increment martingale_increment(const PotentialState& ps, const TrackedMartingale& m, const StepView& v) {
  const Graph& g = ps.graph();
  const Params& p = ps.params();
  const Real Dg = static_cast<Real>(p.denom());
  const Endpoints ep = g.endpoints(v.edge);
  const bool good = !v.u_bad && !v.v_bad;
  const bool sample = v.branch == Branch::sample_path;
  Increment inc;

  switch (m.kind) {
    case MartingaleKind::Q: {
      const bool own = ep.u == m.w || ep.v == m.w;
      if (own) {
        inc.step = true;
        for (Color c : m.C) {
          const Real pec = static_cast<Real>(v.p_edge[c - 1]);
          Real d = -pec * Dg;
          for (const Incidence& in : g.incident(m.w)) {
            if (!unarrived_other(v, in.edge)) continue;
            const EntryChange ch = entry(v, in.edge, c);
            d += static_cast<Real>(ch.after) * (Dg - pec) - static_cast<Real>(ch.before) * Dg;
          }
          inc.delta += ps.pi(m.w, c) * d / (Dg * Dg);
        }
        return inc;
      }
      if (!colored_branch(v.branch)) return inc;
      for (const Incidence& in : g.incident(m.w)) {
        if (!unarrived_other(v, in.edge) || !g.share_endpoint(in.edge, v.edge)) continue;
        inc.step = true;
        for (Color c : m.C) {
          const EntryChange ch = entry(v, in.edge, c);
          if (ch.tr) inc.delta += ps.pi(m.w, c) * static_cast<Real>(ch.after - ch.before) / Dg;
        }
      }
      return inc;
    }
    case MartingaleKind::K:
    case MartingaleKind::negL: {
      if (std::binary_search(m.M.begin(), m.M.end(), v.edge)) return inc;
      const bool neg = m.kind == MartingaleKind::negL;
      if (neg ? !(good && sample) : !colored_branch(v.branch)) return inc;
      if (!adjacent_unarrived_in(v, m.M)) return inc;
      inc.step = true;
      for (EdgeId f : m.M) {
        if (!g.share_endpoint(f, v.edge) || !unarrived_other(v, f)) continue;
        for (Color c : m.C) {
          const Transition* t = find_transition(v.transitions, f, c);
          if (!t) continue;
          if (neg)
            inc.delta -= t->bar - static_cast<Real>(t->before) / Dg;
          else
            inc.delta += static_cast<Real>(t->after - t->before) / Dg;
        }
      }
      return inc;
    }
    case MartingaleKind::H: {
      if (!touches_vertex_set(ep, m.U) || !good || !sample) return inc;
      if (z_over(v.p_edge, nullptr) / Dg < 1 - p.c_K() * p.eps()) return inc;
      inc.step = true;
      inc.delta = -static_cast<Real>(p.c_K() * p.eps()) + (v.main_color ? 0 : 1);
      return inc;
    }
    case MartingaleKind::X: {
      if (!touches_vertex_set(ep, m.U) || !good) return inc;
      const Real share = (1 - static_cast<Real>(p.eps()) / 2) * static_cast<Real>(m.C.size()) / static_cast<Real>(p.delta());
      if (z_over(v.p_edge, &m.color_mask) / Dg > share) return inc;
      inc.step = true;
      const bool hit = sample && v.main_color && m.color_mask.test(*v.main_color);
      inc.delta = endpoints_in(ep, m.U) * (-share + (hit ? 1 : 0));
      return inc;
    }
  }
  return inc;
}

Real term_delta(const TrackedMartingale& m, const Increment& inc) {
  if (!inc.step) {
    if (inc.delta != 0) throw std::logic_error(martingale_kind_name(m.kind) + " term moved without a step");
    return 0;
  }
  const Real x = m.params.rate() * inc.delta - m.params.step_charge();
  return static_cast<Real>(m.multiplicity) * m.phi_now * real_expm1(x);
}

namespace {

StepView pre_view(const ColoringState& s, EdgeId e, const Classification& cls, const Outcome& outcome,
                  std::span<const Transition> trs) {
  StepView v;
  v.state = &s;
  v.edge = e;
  v.branch = cls.branch;
  v.main_color = cls.branch == Branch::bad_path_color ? std::optional<Color>(cls.bad_color) : outcome.color;
  v.u_bad = cls.u_bad;
  v.v_bad = cls.v_bad;
  v.p_edge = s.P(e);
  v.transitions = trs;
  return v;
}

}  // namespace

Real potential_delta(const PotentialState& ps, const ColoringState& s, EdgeId e, const Outcome& outcome,
                     const RoundingPlan& rounding) {
  const Classification cls = classify_arrival(s, e);
  if (cls.branch == Branch::sample_path && outcome.color && s.P(e, *outcome.color) == 0)
    throw std::invalid_argument("color " + std::to_string(*outcome.color) + " has zero weight on edge " + std::to_string(e));
  const std::vector<Transition> trs = preview_updates(s, e, cls, outcome, rounding);
  const StepView v = pre_view(s, e, cls, outcome, trs);
  Real total = 0;
  for (std::uint32_t i : ps.affected_by(e)) {
    const TrackedMartingale& m = ps.martingales()[i];
    total += term_delta(m, martingale_increment(ps, m, v));
  }
  return total;
}

namespace {

// Derivative of one term's contribution with respect to P_fc, for a scaled entry
// one grid step up. Zero when the entry does not enter the term.
Real slot_coefficient(const PotentialState& ps, const TrackedMartingale& m, const StepView& v, EdgeId f, Color c) {
  const Graph& g = ps.graph();
  const Real Dg = static_cast<Real>(ps.params().denom());
  if (!m.color_mask.test(c)) return 0;
  switch (m.kind) {
    case MartingaleKind::Q: {
      const Endpoints fe = g.endpoints(f);
      if (fe.u != m.w && fe.v != m.w) return 0;
      const Endpoints ep = g.endpoints(v.edge);
      if (ep.u == m.w || ep.v == m.w)
        return ps.pi(m.w, c) * (Dg - static_cast<Real>(v.p_edge[c - 1])) / (Dg * Dg);
      return ps.pi(m.w, c) / Dg;
    }
    case MartingaleKind::K:
      return std::binary_search(m.M.begin(), m.M.end(), f) ? 1 / Dg : 0;
    case MartingaleKind::negL:
      if (v.u_bad || v.v_bad) return 0;
      return std::binary_search(m.M.begin(), m.M.end(), f) ? -1 / Dg : 0;
    default:
      return 0;
  }
}

std::string outcome_label(const Outcome& o) { return o.color ? std::to_string(*o.color) : "bottom"; }

}  // namespace

ArgminChoice choose_color_argmin(const PotentialState& ps, const ColoringState& s, EdgeId e) {
  const Classification cls = classify_arrival(s, e);
  if (cls.branch != Branch::sample_path)
    throw std::logic_error("argmin requested for edge " + std::to_string(e) + " on the " + branch_name(cls.branch) + " branch");
  const Params& p = s.params();
  const auto row = s.P(e);
  std::vector<Outcome> outcomes;
  for (Color c = 1; c <= p.delta(); ++c)
    if (row[c - 1] > 0) outcomes.push_back(Outcome{c});
  if (s.Z(e) < p.denom()) outcomes.push_back(Outcome{});

  const auto affected = ps.affected_by(e);
  const auto& terms = ps.martingales();
  ArgminChoice best;
  bool have = false;
  for (const Outcome& o : outcomes) {
    std::vector<RoundingBit> slots = rounding_slots(s, e, cls, o);
    if (!slots.empty()) {
      const std::vector<Transition> trs = preview_updates(s, e, cls, o, RoundingPlan::explicit_bits(slots));
      const StepView v = pre_view(s, e, cls, o, trs);
      std::vector<Increment> inc(affected.size());
      for (std::size_t k = 0; k < affected.size(); ++k) inc[k] = martingale_increment(ps, terms[affected[k]], v);
      for (RoundingBit& slot : slots) {
        std::vector<std::pair<std::size_t, Real>> touch;
        Real grad = 0;
        for (std::size_t k = 0; k < affected.size(); ++k) {
          const TrackedMartingale& m = terms[affected[k]];
          if (!inc[k].step) continue;
          const Real coef = slot_coefficient(ps, m, v, slot.target, slot.color);
          if (coef == 0) continue;
          touch.emplace_back(k, coef);
          const Real x = m.params.rate() * inc[k].delta - m.params.step_charge();
          grad += static_cast<Real>(m.multiplicity) * m.phi_now * real_exp(x) * m.params.rate() * coef;
        }
        if (grad < 0) {
          slot.up = true;
          for (const auto& [k, coef] : touch) inc[k].delta += coef;
        }
      }
    }
    RoundingPlan plan = RoundingPlan::explicit_bits(std::move(slots));
    const Real d = potential_delta(ps, s, e, o, plan);
    best.candidates.push_back({o, d});
    if (!have || d < best.delta - static_cast<Real>(kTieTolerance)) {
      have = true;
      best.outcome = o;
      best.rounding = std::move(plan);
      best.delta = d;
    }
  }
  const Real scale = std::max(Real(1), ps.phi());
  if (!have || best.delta > static_cast<Real>(kTieTolerance) * scale) {
    nlohmann::json dump;
    dump["edge"] = e;
    dump["phi"] = real_to_string(ps.phi());
    for (const CandidateScore& c : best.candidates)
      dump["candidates"].push_back({{"outcome", outcome_label(c.outcome)}, {"delta", real_to_string(c.delta)}});
    throw EstimatorBreach("estimator breach at edge " + std::to_string(e) + ": every outcome raises the potential",
                          dump.dump());
  }
  return best;
}

void update_potentials(PotentialState& ps, const ColoringState& s, const DecisionRecord& rec) {
  const EdgeId e = rec.edge;
  const EdgeRecord& r = rec.rec;
  StepView v;
  v.state = &s;
  v.edge = e;
  v.branch = r.branch;
  v.main_color = r.main_color;
  v.u_bad = r.u_bad;
  v.v_bad = r.v_bad;
  v.p_edge = r.p_before;
  v.transitions = rec.transitions;

  const auto affected = ps.affected_by(e);
  std::vector<Increment> incs(affected.size());
  for (std::size_t k = 0; k < affected.size(); ++k) incs[k] = martingale_increment(ps, ps.terms_[affected[k]], v);

  if (ps.options_.audit_all) {
    std::vector<char> listed(ps.terms_.size(), 0);
    for (std::uint32_t i : affected) listed[i] = 1;
    for (std::size_t i = 0; i < ps.terms_.size(); ++i) {
      if (listed[i]) continue;
      const Increment inc = martingale_increment(ps, ps.terms_[i], v);
      if (inc.step || inc.delta != 0) ps.violations_.push_back({i, e});
    }
  }

  for (std::size_t k = 0; k < affected.size(); ++k) {
    TrackedMartingale& m = ps.terms_[affected[k]];
    const Increment& inc = incs[k];
    if (!inc.step) {
      if (inc.delta != 0) throw std::logic_error(martingale_kind_name(m.kind) + " term moved without a step");
      continue;
    }
    const Real d = term_delta(m, inc);
    m.value += inc.delta;
    ++m.steps;
    if (static_cast<Real>(m.steps) > m.params.N)
      throw StepBudgetError(martingale_kind_name(m.kind) + " term exceeded its step budget at edge " + std::to_string(e));
    m.phi_now = term_phi(m);
    ps.phi_ += d;
    ps.family_phi_[static_cast<std::size_t>(m.family)] += d;
  }

  const Endpoints ep = ps.graph().endpoints(e);
  const Real Dg = static_cast<Real>(ps.params().denom());
  for (Vertex w : {ep.u, ep.v})
    for (Color c = 1; c <= ps.params().delta(); ++c)
      ps.pi_[std::size_t(w) * ps.params().delta() + (c - 1)] *= 1 - static_cast<Real>(r.p_before[c - 1]) / Dg;
}

Real phi_from_terms(const PotentialState& ps) {
  Real total = 0;
  for (const TrackedMartingale& m : ps.martingales()) total += static_cast<Real>(m.multiplicity) * term_phi(m);
  return total;
}

InvariantReport check_invariants(const PotentialState& ps, const ColoringState& s) {
  const Graph& g = s.graph();
  const Params& p = s.params();
  InvariantReport out;
  out.phi = ps.phi();
  out.small_potential = ps.phi() <= ps.phi_initial() * (1 + 1e-24);

  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    std::size_t capped = 0;
    for (GridNum x : s.P(e))
      if (x > p.cap_numerator()) ++capped;
    out.max_capped_colors = std::max(out.max_capped_colors, capped);
  }
  out.few_bad_colors = static_cast<double>(out.max_capped_colors) <= 2 * std::pow(p.eps(), 5) * static_cast<double>(p.delta());

  for (Vertex w = 0; w < g.num_vertices(); ++w) {
    std::size_t bad = 0;
    for (const Incidence& in : g.incident(w))
      if (s.is_bad(in.other)) ++bad;
    out.max_bad_neighbors = std::max(out.max_bad_neighbors, bad);
    if (!s.is_bad(w)) continue;
    std::size_t empty = 0;
    for (const Incidence& in : g.incident(w)) {
      if (!s.arrived(in.edge)) continue;
      const EdgeRecord& r = s.record(in.edge);
      const bool w_bad_then = g.endpoints(in.edge).u == w ? r.u_bad : r.v_bad;
      const bool all_zero = std::all_of(r.p_before.begin(), r.p_before.end(), [](GridNum x) { return x == 0; });
      if (w_bad_then && all_zero) ++empty;
    }
    out.max_empty_after_bad = std::max(out.max_empty_after_bad, empty);
  }
  out.few_bad_neighbors = static_cast<double>(out.max_bad_neighbors) <= p.alpha() * static_cast<double>(p.delta());
  out.bad_vertex_property = static_cast<double>(out.max_empty_after_bad) <= p.eps() * static_cast<double>(p.delta());
  return out;
}

void write_phi_trace_csv(std::ostream& os, const std::vector<PhiTraceRow>& rows) {
  os << "# ecol phi trace v1\n";
  os << "t,edge,outcome,phi_before,phi_after,few_bad_colors,few_bad_neighbors,bad_vertex_prop\n";
  for (const PhiTraceRow& r : rows) {
    os << r.t << ',' << r.edge << ',' << r.outcome << ',' << real_to_string(r.phi_before) << ','
       << real_to_string(r.phi_after);
    for (const Real& f : r.family) os << ',' << real_to_string(f);
    os << '\n';
  }
}

Decision DerandChooser::choose(const ColoringState& s, EdgeId e, const Classification& cls) {
  // The argmin depends on the state of every term the arrival affects. Report the
  // objects that state is a function of, with each weight row standing for the
  // neighbor tuples it is rebuilt from, so locality audits see the full footprint.
  if (const ReadGuard* guard = s.guard()) {
    const Graph& g = s.graph();
    auto weights_of = [&](EdgeId f) {
      guard->on_edge(f);
      g.for_each_line_neighbor(f, [&](EdgeId x) { guard->on_edge(x); });
    };
    for (std::uint32_t i : ps_->affected_by(e)) {
      const TrackedMartingale& m = ps_->martingales()[i];
      if (m.kind == MartingaleKind::Q)
        for (const Incidence& in : g.incident(m.w)) weights_of(in.edge);
      for (Vertex u : m.U) guard->on_vertex(u);
      for (EdgeId f : m.M) weights_of(f);
    }
  }
  ArgminChoice a = choose_color_argmin(*ps_, s, e);
  return Decision{cls, a.outcome, std::move(a.rounding)};
}

void DerandChooser::observe(const ColoringState& s, const DecisionRecord& rec) {
  PhiTraceRow row;
  row.t = rec.rec.t;
  row.edge = rec.edge;
  row.outcome = rec.rec.main_color ? std::to_string(*rec.rec.main_color) : (rec.rec.marked ? "marked" : "bottom");
  row.phi_before = ps_->phi();
  update_potentials(*ps_, s, rec);
  row.phi_after = ps_->phi();
  row.family = ps_->family_phi();
  if (keep_trace_) trace_.push_back(std::move(row));
}

}  // namespace ecol
