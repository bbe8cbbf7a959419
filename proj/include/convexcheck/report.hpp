#pragma once

#include <json.hpp>

#include "convexcheck/checker.hpp"
#include "convexcheck/oracle.hpp"

namespace convexcheck {

/// {"status", "region_count", "frontier_count", "conditions", "degeneracies",
///  "vacuous_neurons", "tolerances", ...} with neurons named by id.
nlohmann::json report_to_json(const Network& net, const ConvexityReport& report);

nlohmann::json verdict_to_json(const OracleVerdict& v);

}  // namespace convexcheck
