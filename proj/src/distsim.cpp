#include "ecol/distsim.hpp"

#include <algorithm>
#include <bit>
#include <unordered_map>

namespace ecol {

std::string mode_name(BandwidthMode m) { return m == BandwidthMode::local ? "local" : "congest"; }

BandwidthMode parse_mode(const std::string& s) {
  if (s == "local") return BandwidthMode::local;
  if (s == "congest") return BandwidthMode::congest;
  throw std::invalid_argument("unknown mode '" + s + "' (expected local or congest)");
}

void Message::write(std::uint64_t value, unsigned width) {
  for (unsigned i = 0; i < width; ++i, ++bits_) {
    if (bits_ % 64 == 0) words_.push_back(0);
    if ((value >> i) & 1u) words_[bits_ / 64] |= std::uint64_t{1} << (bits_ % 64);
  }
}

std::uint64_t Message::read(std::size_t pos, unsigned width) const {
  std::uint64_t v = 0;
  for (unsigned i = 0; i < width; ++i, ++pos)
    if ((words_[pos / 64] >> (pos % 64)) & 1u) v |= std::uint64_t{1} << i;
  return v;
}

void Message::push(std::uint64_t value, unsigned width) {
  if (width == 0 || width >= (1u << kPrefixBits))
    throw std::invalid_argument("field width " + std::to_string(width) + " out of range");
  if (width < 64 && (value >> width) != 0)
    throw std::invalid_argument("value " + std::to_string(value) + " does not fit in " + std::to_string(width) + " bits");
  write(width, kPrefixBits);
  write(value, width);
}

void Message::push(std::uint64_t value) { push(value, std::max(1u, unsigned(std::bit_width(value)))); }

std::size_t Message::num_fields() const {
  std::size_t k = 0;
  for (std::size_t pos = 0; pos < bits_; ++k) pos += kPrefixBits + read(pos, kPrefixBits);
  return k;
}

std::uint64_t Message::field(std::size_t i) const {
  std::size_t pos = 0;
  for (std::size_t k = 0; pos < bits_; ++k) {
    const unsigned w = static_cast<unsigned>(read(pos, kPrefixBits));
    if (k == i) return read(pos + kPrefixBits, w);
    pos += kPrefixBits + w;
  }
  throw std::out_of_range("message has no field " + std::to_string(i));
}

RoundCapError::RoundCapError(std::size_t cap, RoundTrace trace)
    : std::runtime_error("nodes still running after the round cap of " + std::to_string(cap)),
      trace_(std::move(trace)) {}

namespace {

std::uint64_t channel_key(Vertex from, Vertex to) { return (std::uint64_t(from) << 32) | to; }

std::size_t rounds_for(std::size_t bits, const NetworkConfig& c) {
  if (c.mode == BandwidthMode::local || bits == 0) return 1;
  return (bits + c.bandwidth_bits - 1) / c.bandwidth_bits;
}

}  // namespace

RoundTrace run_rounds(const Graph& g, NodeProgram& program, const NetworkConfig& config) {
  if (config.mode == BandwidthMode::congest && config.bandwidth_bits == 0)
    throw std::invalid_argument("CONGEST mode needs a positive bandwidth");
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<Vertex>> nbrs(n);
  for (Vertex v = 0; v < n; ++v) {
    for (const Incidence& in : g.incident(v)) nbrs[v].push_back(in.other);
    std::sort(nbrs[v].begin(), nbrs[v].end());
  }

  RoundTrace trace;
  std::unordered_map<std::uint64_t, std::size_t> round_bits, total_bits;
  std::size_t round_msgs = 0;
  std::vector<std::vector<Envelope>> next(n), inbox(n);

  auto send = [&](Vertex v, std::vector<Envelope> out) {
    for (Envelope& env : out) {
      if (!std::binary_search(nbrs[v].begin(), nbrs[v].end(), env.peer))
        throw std::invalid_argument("node " + std::to_string(v) + " sent to non-neighbor " + std::to_string(env.peer));
      round_bits[channel_key(v, env.peer)] += env.msg.bits();
      ++round_msgs;
      const Vertex to = env.peer;
      env.peer = v;
      next[to].push_back(std::move(env));
    }
  };
  auto close_round = [&](std::size_t round) {
    RoundRow row;
    row.round = round;
    row.total_msgs = round_msgs;
    for (const auto& [key, bits] : round_bits) {
      row.max_bits = std::max(row.max_bits, bits);
      const std::size_t k = rounds_for(bits, config);
      if (trace.congestion_histogram.size() <= k) trace.congestion_histogram.resize(k + 1, 0);
      ++trace.congestion_histogram[k];
      std::size_t& total = total_bits[key];
      total += bits;
      trace.max_channel_bits_total = std::max(trace.max_channel_bits_total, total);
    }
    row.physical = rounds_for(row.max_bits, config);
    trace.physical_rounds += row.physical;
    trace.logical_rounds = round;
    trace.rows.push_back(row);
    round_bits.clear();
    round_msgs = 0;
  };

  for (Vertex v = 0; v < n; ++v) send(v, program.start(v));
  for (std::size_t round = 1;; ++round) {
    bool in_flight = round_msgs > 0;
    bool all_halted = true;
    for (Vertex v = 0; v < n && all_halted; ++v) all_halted = program.halted(v);
    if (!in_flight && all_halted) break;
    if (round > config.round_cap) throw RoundCapError(config.round_cap, std::move(trace));
    close_round(round);
    inbox.swap(next);
    for (auto& box : next) box.clear();
    for (Vertex v = 0; v < n; ++v) {
      std::stable_sort(inbox[v].begin(), inbox[v].end(),
                       [](const Envelope& a, const Envelope& b) { return a.peer < b.peer; });
      send(v, program.receive(v, round, inbox[v]));
    }
  }
  return trace;
}

void write_trace_csv(std::ostream& os, const RoundTrace& trace) {
  os << "# ecol round trace v1\n";
  os << "round,max_bits,total_msgs\n";
  for (const RoundRow& r : trace.rows) os << r.round << ',' << r.max_bits << ',' << r.total_msgs << '\n';
}

IdMap compress_ids(const Graph& g, std::size_t r) {
  if (r < 1) throw std::invalid_argument("compress_ids needs r >= 1");
  IdMap out;
  const std::size_t n = g.num_vertices();
  constexpr std::uint32_t kUnset = ~std::uint32_t{0};
  out.ids.assign(n, kUnset);
  VertexBfs bfs(g);
  std::vector<std::size_t> used;
  for (Vertex v = 0; v < n; ++v) {
    for (Vertex u : bfs.run(v, 2 * r)) {
      const std::uint32_t id = out.ids[u];
      if (id == kUnset) continue;
      if (used.size() <= id) used.resize(id + 1, 0);
      used[id] = v + 1;
    }
    std::uint32_t id = 0;
    while (id < used.size() && used[id] == v + 1) ++id;
    out.ids[v] = id;
    out.palette = std::max<std::size_t>(out.palette, id + 1);
  }
  out.bits = std::max(1u, unsigned(std::bit_width(out.palette > 0 ? out.palette - 1 : 0)));
  return out;
}

}  // namespace ecol
