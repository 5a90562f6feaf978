#pragma once
// A graph bundled with an optional adversarial arrival order and free-form metadata.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ecol/graph.hpp"

namespace ecol {

struct Instance {
  Graph graph;
  std::optional<std::vector<EdgeId>> arrival_order;
  nlohmann::json meta = nlohmann::json::object();
};

// Throws unless `order` is a permutation of the edge ids of g.
void check_arrival_order(const Graph& g, const std::vector<EdgeId>& order);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

std::string dump_instance(const Instance& inst);
Instance parse_instance(const std::string& text);

Instance read_instance_file(const std::string& path);
void write_instance_file(const Instance& inst, const std::string& path);

}  // namespace ecol
