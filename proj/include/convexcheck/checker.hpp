#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "convexcheck/network.hpp"
#include "convexcheck/pathlift.hpp"
#include "convexcheck/regions.hpp"

namespace convexcheck {

enum class Status { Convex, NotConvex, Inconclusive };

/// "convex", "not_convex", "inconclusive"
const char* to_string(Status s);

struct CheckOptions {
  RegionOptions regions;
  double decision_tol = 1e-9;
  double slope_tol = 1e-8;
  /// Resolve Inconclusive with the exact CPWL oracle when the enumeration is
  /// complete.
  bool fallback_oracle = true;
};

/// One evaluated inner product <a, Phi^{nu->}> for a restriction a read on a
/// single-switch frontier of `neuron`.
struct ConditionRecord {
  NeuronIndex neuron = 0;
  ActivationRestriction restriction;
  double value = 0.0;
  bool satisfied = true;  // value >= -decision_tol
  bool marginal = false;  // -decision_tol < value < 0
  std::vector<std::size_t> frontiers;
};

struct Degeneracy {
  std::size_t frontier = 0;
  std::size_t region_a = 0;
  std::size_t region_b = 0;
  std::vector<NeuronIndex> switching;
  bool slope_changes = false;
  std::vector<double> witness;
};

struct ConvexityReport {
  Status status = Status::Inconclusive;
  std::vector<ConditionRecord> conditions;
  std::vector<Degeneracy> degeneracies;     // multi-switch frontiers
  std::vector<NeuronIndex> vacuous_neurons;  // never switch inside the box
  std::vector<NeuronIndex> degenerate_only_neurons;
  bool assumption_holds = true;   // every slope-changing frontier is single-switch
  bool enumeration_complete = true;
  bool resolved_by_oracle = false;
  std::optional<bool> oracle_cross_check;  // exact oracle verdict, when it ran

  std::size_t region_count = 0;    // maximal affine pieces
  std::size_t frontier_count = 0;  // frontiers between affine pieces, one per supporting hyperplane
  std::size_t activation_region_count = 0;
  std::size_t activation_frontier_count = 0;
  std::size_t probe_misses = 0;
  std::size_t dangling_facets = 0;
  std::size_t thin_facets = 0;

  CheckOptions options;
  Partition partition;
  FrontierSet frontiers;
  AffinePieces pieces;
};

/// Enumerates regions and frontiers on the box, evaluates one condition per
/// (neuron, distinct restriction) on single-switch frontiers, and decides:
/// NotConvex if some condition is violated; otherwise Convex if the single
/// switch assumption holds and the enumeration is complete; otherwise
/// Inconclusive, handed to the exact oracle when options allow it.
ConvexityReport check_convexity(const Network& net, const DomainBox& box, const CheckOptions& opts = {});

/// The necessary conditions only; no sufficiency claim.
std::vector<ConditionRecord> check_necessary(const Network& net, const DomainBox& box, const CheckOptions& opts = {});

/// Evaluates the conditions of already extracted isolated data.
std::vector<ConditionRecord> evaluate_conditions(const Network& net, const IsolatedData& iso, double decision_tol);

/// True iff two augmented rows (w, b) are parallel up to sign, compared as
/// unit vectors with sup-norm tolerance `tol`.
bool colinear_rows(std::span<const double> u, std::span<const double> v, double tol = 1e-9);

struct OneLayerSummary {
  std::size_t trials = 0;
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t screened_colinear = 0;  // draws with two parallel augmented rows
  std::size_t screened_box = 0;       // draws with a neuron that does not switch inside the box
  std::size_t convex_expected = 0;    // draws with a non-negative last layer
  std::vector<std::uint64_t> failing_seeds;
};

/// Samples one-hidden-layer Gaussian nets until `trials` of them pass the
/// colinearity screen and have every neuron switching inside the box, then
/// compares the checker verdict with "last layer entrywise >= 0".
OneLayerSummary verify_one_hidden_layer_theorem(std::size_t trials, std::uint64_t seed, std::size_t d = 2,
                                                std::size_t width = 4, double box_halfwidth = 10.0);

/// Per-trial seed used by verify_one_hidden_layer_theorem.
std::uint64_t one_layer_trial_seed(std::uint64_t seed, std::size_t attempt);

}  // namespace convexcheck
