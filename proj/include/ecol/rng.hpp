#pragma once
// Seeded, platform-independent randomness helpers.

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace ecol {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Hash of a key tuple; used to derive independent streams such as (seed, edge-id).
inline std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k));
  return h;
}

// Uniform draw from [0, bound) by widening multiplication. The bias is at most
// bound / 2^64, far below anything the callers can observe.
inline std::uint64_t bounded(std::uint64_t word, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(word) * bound) >> 64);
}

using Rng = std::mt19937_64;

inline Rng keyed_rng(std::initializer_list<std::uint64_t> keys) { return Rng(mix_keys(keys)); }

inline std::uint64_t draw_below(Rng& rng, std::uint64_t bound) { return bounded(rng(), bound); }

inline double draw_unit(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <typename T>
void shuffle_in_place(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[draw_below(rng, i)]);
}

}  // namespace ecol
