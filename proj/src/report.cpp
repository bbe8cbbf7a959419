#include "convexcheck/report.hpp"

namespace convexcheck {

namespace {

nlohmann::json ids(const Network& net, const std::vector<NeuronIndex>& ns) {
  nlohmann::json a = nlohmann::json::array();
  for (NeuronIndex n : ns) a.push_back(net.id(n));
  return a;
}

}  // namespace

nlohmann::json report_to_json(const Network& net, const ConvexityReport& rep) {
  nlohmann::json j;
  j["status"] = to_string(rep.status);
  j["region_count"] = rep.region_count;
  j["frontier_count"] = rep.frontier_count;
  j["activation_region_count"] = rep.activation_region_count;
  j["activation_frontier_count"] = rep.activation_frontier_count;

  nlohmann::json conds = nlohmann::json::array();
  for (const auto& c : rep.conditions) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < c.restriction.neurons.size(); ++i)
      r[net.id(c.restriction.neurons[i])] = static_cast<int>(c.restriction.bits[i]);
    conds.push_back({{"neuron", net.id(c.neuron)},
                     {"restriction", r},
                     {"value", c.value},
                     {"satisfied", c.satisfied},
                     {"marginal", c.marginal}});
  }
  j["conditions"] = conds;

  nlohmann::json degs = nlohmann::json::array();
  for (const auto& d : rep.degeneracies)
    degs.push_back({{"regions",
                     {to_string(rep.partition.regions[d.region_a].pattern),
                      to_string(rep.partition.regions[d.region_b].pattern)}},
                    {"switching", ids(net, d.switching)},
                    {"slope_changes", d.slope_changes},
                    {"witness", d.witness}});
  j["degeneracies"] = degs;
  j["vacuous_neurons"] = ids(net, rep.vacuous_neurons);
  j["degenerate_only_neurons"] = ids(net, rep.degenerate_only_neurons);
  j["assumption_holds"] = rep.assumption_holds;
  j["enumeration_complete"] = rep.enumeration_complete;
  j["resolved_by_oracle"] = rep.resolved_by_oracle;
  j["oracle_cross_check"] = rep.oracle_cross_check ? nlohmann::json(*rep.oracle_cross_check) : nlohmann::json();
  j["diagnostics"] = {{"probe_misses", rep.probe_misses},
                      {"dangling_facets", rep.dangling_facets},
                      {"thin_facets", rep.thin_facets}};
  j["tolerances"] = {{"zero_tol", rep.options.regions.zero_tol},
                     {"margin_tol", rep.options.regions.margin_tol},
                     {"decision_tol", rep.options.decision_tol},
                     {"slope_tol", rep.options.slope_tol}};
  return j;
}

nlohmann::json verdict_to_json(const OracleVerdict& v) {
  nlohmann::json j{{"convex", v.convex}};
  if (v.witness) {
    j["witness"] = {{"x", v.witness->x}, {"y", v.witness->y}, {"violation", v.witness->violation}};
    if (v.witness->frontier) j["witness"]["frontier"] = *v.witness->frontier;
  }
  return j;
}

}  // namespace convexcheck
