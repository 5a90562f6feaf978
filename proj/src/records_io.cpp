#include "ecol/records_io.hpp"

#include <stdexcept>

namespace ecol {

nlohmann::json rounding_to_json(const RoundingPlan& plan) {
  if (plan.is_keyed()) return {{"mode", "keyed"}, {"seed", plan.seed()}};
  nlohmann::json bits = nlohmann::json::array();
  for (const RoundingBit& b : plan.bits()) bits.push_back({b.target, b.color, b.up ? 1 : 0});
  return {{"mode", "explicit"}, {"bits", std::move(bits)}};
}

RoundingPlan rounding_from_json(const nlohmann::json& j) {
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "keyed") return RoundingPlan::keyed(j.at("seed").get<std::uint64_t>());
  if (mode != "explicit") throw std::invalid_argument("unknown rounding mode " + mode);
  std::vector<RoundingBit> bits;
  for (const auto& b : j.at("bits"))
    bits.push_back({b.at(0).get<EdgeId>(), b.at(1).get<Color>(), b.at(2).get<int>() != 0});
  return RoundingPlan::explicit_bits(std::move(bits));
}

nlohmann::json record_to_json(const DecisionRecord& rec, GridNum denom) {
  const EdgeRecord& r = rec.rec;
  nlohmann::json j;
  j["edge"] = rec.edge;
  j["t"] = r.t;
  j["branch"] = branch_name(r.branch);
  j["color"] = r.color;
  j["tag"] = line_tag_name(r.tag);
  j["outcome"] = r.main_color ? nlohmann::json(*r.main_color) : nlohmann::json(nullptr);
  j["P_before"] = r.p_before;
  j["grid_denominator"] = denom;
  j["marked"] = r.marked;
  j["bad_endpoints"] = {r.u_bad, r.v_bad};
  j["rounding"] = rounding_to_json(r.rounding);
  return j;
}

DecisionRecord record_from_json(const nlohmann::json& j) {
  DecisionRecord rec;
  rec.edge = j.at("edge").get<EdgeId>();
  EdgeRecord& r = rec.rec;
  r.t = j.at("t").get<std::uint32_t>();
  r.branch = parse_branch(j.at("branch").get<std::string>());
  r.color = j.at("color").get<Color>();
  const std::string tag = j.at("tag").get<std::string>();
  r.tag = tag == "color" ? LineTag::color : tag == "color_bad" ? LineTag::color_bad : LineTag::greedy;
  if (!j.at("outcome").is_null()) r.main_color = j.at("outcome").get<Color>();
  r.p_before = j.at("P_before").get<std::vector<GridNum>>();
  r.marked = j.at("marked").get<bool>();
  r.u_bad = j.at("bad_endpoints").at(0).get<bool>();
  r.v_bad = j.at("bad_endpoints").at(1).get<bool>();
  r.rounding = rounding_from_json(j.at("rounding"));
  return rec;
}

void write_records_jsonl(std::ostream& os, const std::vector<DecisionRecord>& recs, GridNum denom) {
  for (const DecisionRecord& r : recs) os << record_to_json(r, denom).dump() << '\n';
}

}  // namespace ecol
