// Registration of the martingale families and their support index.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "ecol/derand.hpp"
#include "ecol/rng.hpp"

namespace ecol {

namespace {

std::size_t floor_size(double x) {
  const double f = std::floor(x + 1e-12);
  return f < 1.0 ? 1 : static_cast<std::size_t>(f);
}

// C(n, s), saturating at `cap + 1`.
std::size_t binom_capped(std::size_t n, std::size_t s, std::size_t cap) {
  if (s > n) return 0;
  s = std::min(s, n - s);
  unsigned __int128 r = 1;
  for (std::size_t i = 1; i <= s; ++i) {
    r = r * (n - s + i) / i;
    if (r > cap) return cap + 1;
  }
  return static_cast<std::size_t>(r);
}

// Calls fn(subset) for size-s subsets of `items`: every subset in exact mode or
// when there are at most k of them, else k distinct seeded draws.
template <typename T, typename Fn>
void for_each_subset(const std::vector<T>& items, std::size_t s, const EnumerationMode& mode,
                     std::initializer_list<std::uint64_t> key, Fn&& fn) {
  const std::size_t n = items.size();
  if (s == 0 || s > n) return;
  const bool all = mode.exact || binom_capped(n, s, mode.k) <= mode.k;
  std::vector<T> pick(s);
  if (all) {
    std::vector<std::size_t> idx(s);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t i = 0; i < s; ++i) pick[i] = items[idx[i]];
      fn(pick);
      std::size_t i = s;
      while (i > 0 && idx[i - 1] == n - s + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
    }
    return;
  }
  Rng rng(mix_keys(key) ^ mode.seed);
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::size_t> perm(n);
  for (std::size_t attempt = 0; seen.size() < mode.k && attempt < 64 * mode.k; ++attempt) {
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < s; ++i) std::swap(perm[i], perm[i + draw_below(rng, n - i)]);
    std::vector<std::size_t> chosen(perm.begin(), perm.begin() + s);
    std::sort(chosen.begin(), chosen.end());
    if (!seen.insert(chosen).second) continue;
    for (std::size_t i = 0; i < s; ++i) pick[i] = items[chosen[i]];
    fn(pick);
  }
}

std::string term_key(const TrackedMartingale& m) {
  std::string k;
  auto put = [&](std::uint64_t x) { k.append(reinterpret_cast<const char*>(&x), sizeof x); };
  put(static_cast<std::uint64_t>(m.kind));
  put(static_cast<std::uint64_t>(m.family));
  put(m.kind == MartingaleKind::Q ? m.w : 0);
  put(m.U.size());
  for (Vertex u : m.U) put(u);
  put(m.C.size());
  for (Color c : m.C) put(c);
  put(m.M.size());
  for (EdgeId e : m.M) put(e);
  return k;
}

}  // namespace

std::string martingale_kind_name(MartingaleKind k) {
  switch (k) {
    case MartingaleKind::Q: return "Q";
    case MartingaleKind::K: return "K";
    case MartingaleKind::negL: return "negL";
    case MartingaleKind::H: return "H";
    case MartingaleKind::X: return "X";
  }
  return "?";
}

std::string family_name(Family f) {
  switch (f) {
    case Family::few_bad_colors: return "few_bad_colors";
    case Family::few_bad_neighbors: return "few_bad_neighbors";
    case Family::bad_vertex_prop: return "bad_vertex_prop";
  }
  return "?";
}

EnumerationBudgetError::EnumerationBudgetError(std::size_t budget, std::size_t needed)
    : std::runtime_error("exact enumeration needs more than " + std::to_string(needed - 1) +
                         " martingales, above the budget of " + std::to_string(budget)),
      budget_(budget) {}

SetSizes set_sizes(const Params& p) {
  const double d = static_cast<double>(p.delta());
  const double eps = p.eps();
  SetSizes s;
  s.few_bad_colors_C = std::min(p.delta(), floor_size(std::pow(eps, 5) * d));
  s.few_bad_neighbors_U = floor_size(p.alpha() * d);
  s.few_bad_neighbors_M = floor_size(eps * p.alpha() * d);
  s.prop_C = std::min(p.delta(), floor_size(2 * p.c_K() * eps * d));
  s.prop_U = floor_size(eps * d);
  s.prop_M = floor_size(eps * eps * eps * d);
  return s;
}

std::vector<EdgeId> PotentialState::declared_support(std::size_t idx) const {
  const TrackedMartingale& m = terms_.at(idx);
  const Graph& g = *g_;
  std::set<EdgeId> out;
  switch (m.kind) {
    case MartingaleKind::Q:
      for (const Incidence& in : g.incident(m.w)) {
        out.insert(in.edge);
        for (const Incidence& in2 : g.incident(in.other)) out.insert(in2.edge);
      }
      break;
    case MartingaleKind::K:
    case MartingaleKind::negL:
      for (EdgeId f : m.M) g.for_each_line_neighbor(f, [&](EdgeId x) { out.insert(x); });
      for (EdgeId f : m.M) out.erase(f);
      break;
    case MartingaleKind::H:
    case MartingaleKind::X:
      for (Vertex u : m.U)
        for (const Incidence& in : g.incident(u)) out.insert(in.edge);
      break;
  }
  return {out.begin(), out.end()};
}

PotentialState register_potentials(const Graph& g, const EdgeColoring& base, const Params& params,
                                   const PotentialOptions& options) {
  require_proper(g, base, "base coloring");
  {
    std::set<Color> used(base.assignment.begin(), base.assignment.end());
    if (used.size() > 2 * params.delta())
      throw std::invalid_argument("base coloring uses " + std::to_string(used.size()) + " colors, above 2*Delta");
  }
  if (g.max_degree() > params.delta())
    throw std::invalid_argument("graph degree exceeds Delta");

  PotentialState ps(g, params);
  ps.options_ = options;
  ps.sizes_ = set_sizes(params);
  const SetSizes& sz = ps.sizes_;
  const std::size_t delta = params.delta();
  const Real eps = params.eps();
  const Real D = static_cast<Real>(delta);
  const Real A = params.A();
  const Real alpha = params.alpha();
  const Real init = static_cast<Real>(params.initial_numerator()) / static_cast<Real>(params.denom());
  const EnumerationMode& mode = options.mode;

  std::unordered_map<std::string, std::size_t> where;
  auto add = [&](TrackedMartingale m, Vertex anchor) {
    if (mode.exact && ps.registered_ >= mode.budget) throw EnumerationBudgetError(mode.budget, ps.registered_ + 1);
    ++ps.registered_;
    const std::string key = term_key(m);
    auto it = where.find(key);
    if (it != where.end()) {
      TrackedMartingale& t = ps.terms_[it->second];
      ++t.multiplicity;
      t.anchors.push_back(anchor);
      return;
    }
    for (Color c : m.C) m.color_mask.set(c);
    m.value = m.initial;
    m.phi_now = phi(0, 0, m.params.lambda, m.params.S, m.params.N);
    m.anchors = {anchor};
    where.emplace(key, ps.terms_.size());
    ps.terms_.push_back(std::move(m));
  };

  std::vector<Color> palette(delta);
  std::iota(palette.begin(), palette.end(), 1);

  auto add_matching_terms = [&](Family fam, Vertex w, const std::vector<EdgeId>& Mi, std::size_t size,
                                const std::vector<Color>& C, std::uint64_t tag) {
    for_each_subset(Mi, size, mode, {w, static_cast<std::uint64_t>(fam), tag, Mi.front(), C.front()},
                    [&](const std::vector<EdgeId>& M) {
                      const Real mm = static_cast<Real>(M.size()), cc = static_cast<Real>(C.size());
                      TrackedMartingale k;
                      k.family = fam;
                      k.M = M;
                      k.C = C;
                      k.params = {eps * mm * cc / (2 * D), 24 * A, 2 * mm * D};
                      k.kind = MartingaleKind::K;
                      k.initial = mm * cc * init;
                      add(k, w);
                      k.kind = MartingaleKind::negL;
                      k.initial = 0;
                      add(k, w);
                    });
  };

  for (Vertex w = 0; w < g.num_vertices(); ++w) {
    // Few bad colors.
    const Real degw = static_cast<Real>(g.degree(w));
    for_each_subset(palette, sz.few_bad_colors_C, mode, {w, 1}, [&](const std::vector<Color>& C) {
      TrackedMartingale q;
      q.kind = MartingaleKind::Q;
      q.family = Family::few_bad_colors;
      q.w = w;
      q.C = C;
      q.params = {eps * eps * eps * eps * eps * eps * D / 2, 24 * A, D * D};
      q.initial = degw * static_cast<Real>(C.size()) * init;
      add(q, w);
    });

    std::vector<Vertex> nbrs;
    for (const Incidence& in : g.incident(w)) nbrs.push_back(in.other);
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());

    // Few bad neighbors.
    for_each_subset(nbrs, sz.few_bad_neighbors_U, mode, {w, 2}, [&](const std::vector<Vertex>& U) {
      TrackedMartingale h;
      h.kind = MartingaleKind::H;
      h.family = Family::few_bad_neighbors;
      h.U = U;
      h.params = {eps * alpha * D * D, 1, static_cast<Real>(U.size()) * D};
      add(h, w);
      const MatchingPartition part = canonical_matchings_unchecked(g, base, w, U);
      for (const auto& Mi : part.matchings) add_matching_terms(Family::few_bad_neighbors, w, Mi, sz.few_bad_neighbors_M, palette, 3);
    });

    // Bad vertex property.
    for_each_subset(palette, sz.prop_C, mode, {w, 4}, [&](const std::vector<Color>& C) {
      for_each_subset(nbrs, sz.prop_U, mode, {w, 5, C.front(), C.size()}, [&](const std::vector<Vertex>& U) {
        TrackedMartingale x;
        x.kind = MartingaleKind::X;
        x.family = Family::bad_vertex_prop;
        x.U = U;
        x.C = C;
        x.params = {2 * eps * eps * eps * D * D * (1 - eps / 2), 2, static_cast<Real>(U.size()) * D};
        add(x, w);
        const MatchingPartition part = canonical_matchings_unchecked(g, base, w, U);
        for (const auto& Mi : part.matchings) add_matching_terms(Family::bad_vertex_prop, w, Mi, sz.prop_M, C, 6);
      });
    });
  }

  // Support index, as CSR by edge.
  const std::size_t m = g.num_edges();
  std::vector<std::vector<std::uint32_t>> by_edge(m);
  for (std::size_t i = 0; i < ps.terms_.size(); ++i)
    for (EdgeId e : ps.declared_support(i)) by_edge[e].push_back(static_cast<std::uint32_t>(i));
  ps.offsets_.assign(m + 1, 0);
  for (std::size_t e = 0; e < m; ++e) ps.offsets_[e + 1] = ps.offsets_[e] + by_edge[e].size();
  ps.index_.reserve(ps.offsets_[m]);
  for (auto& v : by_edge) ps.index_.insert(ps.index_.end(), v.begin(), v.end());

  ps.pi_.assign(g.num_vertices() * delta, Real(1));
  for (const TrackedMartingale& t : ps.terms_) {
    const Real c = static_cast<Real>(t.multiplicity) * t.phi_now;
    ps.phi_ += c;
    ps.family_phi_[static_cast<std::size_t>(t.family)] += c;
  }
  ps.phi0_ = ps.phi_;
  return ps;
}

}  // namespace ecol
