#pragma once

#include "graph_model.hpp"
#include "layout.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tgforge {

/// Overlays the fields present in `doc` onto `base` and validates the result.
/// Errors are Error(Input) with the offending field name as id. When the
/// edge length changes and minDistance is absent, minDistance follows as
/// 1e-3 * idealEdgeLength.
LayoutParams params_from_json(const nlohmann::json &doc, LayoutParams base = {});
nlohmann::json params_to_json(const LayoutParams &params);

struct LayoutDocument {
  Layout layout;
  std::optional<LayoutParams> params;
};

/// {"positions": {id: [x,y,z]}, "converged", "iterations",
///  "finalMaxDisplacement", "params"?}. Keys are emitted in sorted order and
/// doubles in shortest round-trip form, so output is byte-stable.
std::string serialize_layout(const TheoryGraph &graph, const Layout &layout,
                             const LayoutParams *params = nullptr);
LayoutDocument parse_layout(const TheoryGraph &graph, std::string_view text);

nlohmann::json metrics_to_json(const LayoutMetrics &metrics);

/// Rounds to `digits` significant decimal digits.
double round_significant(double value, int digits);

} // namespace tgforge
