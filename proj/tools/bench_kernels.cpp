// Serial vs OpenMP timings for the schedule kernels, with a check that both
// paths agree. Usage: ecol_bench [n] [delta] [seed]

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <omp.h>

#include "ecol/generators.hpp"
#include "ecol/schedule.hpp"

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 2000;
  const std::size_t delta = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 6;
  const std::uint64_t seed = argc > 3 ? std::strtoull(argv[3], nullptr, 10) : 1;

  const ecol::Instance inst = ecol::make_random_max_deg(n, delta, seed);
  const ecol::Graph& g = inst.graph;
  const ecol::EdgeColoring base = ecol::greedy_edge_coloring(g);
  std::cout << "n=" << n << " m=" << g.num_edges() << " delta=" << g.max_degree()
            << " threads=" << omp_get_max_threads() << '\n';
  std::cout << "kernel,serial_s,parallel_s,agree\n";

  std::vector<std::size_t> ds, dp;
  const double d_ser = seconds([&] { ds = ecol::conflict_degrees(g, base, ecol::Parallelism::serial); });
  const double d_par = seconds([&] { dp = ecol::conflict_degrees(g, base, ecol::Parallelism::parallel); });
  std::cout << "conflict_degrees," << d_ser << ',' << d_par << ',' << (ds == dp) << '\n';

  ecol::ConflictGraph cs, cp;
  const double b_ser = seconds([&] { cs = ecol::build_conflict_graph(g, base, ecol::Parallelism::serial); });
  const double b_par = seconds([&] { cp = ecol::build_conflict_graph(g, base, ecol::Parallelism::parallel); });
  bool same = cs.num_nodes() == cp.num_nodes();
  for (ecol::EdgeId e = 0; same && e < cs.num_nodes(); ++e) {
    const auto a = cs.neighbors(e), b = cp.neighbors(e);
    same = std::equal(a.begin(), a.end(), b.begin(), b.end());
  }
  std::cout << "build_conflict_graph," << b_ser << ',' << b_par << ',' << same << '\n';

  std::vector<ecol::Color> initial(g.num_edges());
  for (ecol::EdgeId e = 0; e < g.num_edges(); ++e) initial[e] = e + 1;
  ecol::PaletteReduction rs, rp;
  const double r_ser = seconds([&] { rs = ecol::reduce_palette(cs, initial, ecol::Parallelism::serial); });
  const double r_par = seconds([&] { rp = ecol::reduce_palette(cs, initial, ecol::Parallelism::parallel); });
  std::cout << "reduce_palette," << r_ser << ',' << r_par << ',' << (rs.colors == rp.colors) << '\n';
  std::cout << "palette=" << rs.palette << " max_conflict_degree=" << cs.max_degree()
            << " bound=" << ecol::conflict_degree_bound(g.max_degree()) << '\n';
  return ds == dp && same && rs.colors == rp.colors ? 0 : 1;
}
