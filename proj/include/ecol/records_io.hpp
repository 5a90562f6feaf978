#pragma once
// JSON forms of per-edge decision records. P values are written as grid numerators
// next to the grid denominator so a record can be checked without floating point.

#include <ostream>
#include <vector>

#include <json.hpp>

#include "ecol/online_color.hpp"

namespace ecol {

nlohmann::json rounding_to_json(const RoundingPlan& plan);
RoundingPlan rounding_from_json(const nlohmann::json& j);

nlohmann::json record_to_json(const DecisionRecord& rec, GridNum denom);
DecisionRecord record_from_json(const nlohmann::json& j);

// One compact JSON object per line.
void write_records_jsonl(std::ostream& os, const std::vector<DecisionRecord>& recs, GridNum denom);

}  // namespace ecol
