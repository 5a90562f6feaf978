#pragma once
// Deterministic instance generators.

#include <cstdint>
#include <string>
#include <vector>

#include "ecol/instance.hpp"

namespace ecol {

enum class GeneratorKind { path, cycle, star_lb, random_max_deg, complete_bipartite };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::path;
  std::vector<std::size_t> params;  // path(n) cycle(n) star_lb(delta, reps) random_max_deg(n, delta) complete_bipartite(a, b)
  std::uint64_t seed = 0;
};

GeneratorKind parse_generator_kind(const std::string& name);
std::string generator_kind_name(GeneratorKind kind);

Instance generate(const GeneratorSpec& spec);

Instance make_path(std::size_t n);
Instance make_cycle(std::size_t n);
// `delta` stars with delta-1 leaves each plus a root joined to every star center,
// repeated `reps` times. Arrival order: every star edge, then every connector.
Instance make_star_lb(std::size_t delta, std::size_t reps);
// Layers `delta` random matchings; the degree cap is exact by construction.
Instance make_random_max_deg(std::size_t n, std::size_t delta, std::uint64_t seed);
Instance make_complete_bipartite(std::size_t a, std::size_t b);

}  // namespace ecol
