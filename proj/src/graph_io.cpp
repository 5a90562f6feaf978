#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ecol/instance.hpp"

namespace ecol {

inline constexpr const char* kGraphSchema = "ecol-graph/1";

void check_arrival_order(const Graph& g, const std::vector<EdgeId>& order) {
  if (order.size() != g.num_edges())
    throw std::invalid_argument("arrival order has " + std::to_string(order.size()) +
                                " entries for " + std::to_string(g.num_edges()) + " edges");
  std::vector<char> seen(g.num_edges(), 0);
  for (EdgeId e : order) {
    g.check_edge(e);
    if (seen[e]++) throw std::invalid_argument("edge " + std::to_string(e) + " arrives twice");
  }
}

nlohmann::json instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["schema"] = kGraphSchema;
  j["n"] = inst.graph.num_vertices();
  nlohmann::json edges = nlohmann::json::array();
  for (const Endpoints& ep : inst.graph.edge_list()) edges.push_back({ep.u, ep.v});
  j["edges"] = std::move(edges);
  if (inst.arrival_order) j["arrival_order"] = *inst.arrival_order;
  if (inst.graph.allows_parallel()) j["allow_parallel"] = true;
  j["meta"] = inst.meta;
  return j;
}

Instance instance_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("edges"))
    throw std::invalid_argument("graph JSON needs \"n\" and \"edges\"");
  if (j.contains("schema") && j.at("schema") != kGraphSchema)
    throw std::invalid_argument("unsupported graph schema " + j.at("schema").dump());
  const std::size_t n = j.at("n").get<std::size_t>();
  std::vector<Endpoints> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::invalid_argument("edge entries must be [u, v]");
    edges.push_back({e[0].get<Vertex>(), e[1].get<Vertex>()});
  }
  const bool parallel = j.value("allow_parallel", false);
  Instance inst{Graph(n, std::move(edges), parallel), std::nullopt, nlohmann::json::object()};
  if (j.contains("arrival_order")) {
    auto order = j.at("arrival_order").get<std::vector<EdgeId>>();
    check_arrival_order(inst.graph, order);
    inst.arrival_order = std::move(order);
  }
  if (j.contains("meta")) inst.meta = j.at("meta");
  return inst;
}

std::string dump_instance(const Instance& inst) { return instance_to_json(inst).dump(); }

Instance parse_instance(const std::string& text) {
  return instance_from_json(nlohmann::json::parse(text));
}

Instance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str());
}

void write_instance_file(const Instance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << dump_instance(inst) << '\n';
}

}  // namespace ecol
