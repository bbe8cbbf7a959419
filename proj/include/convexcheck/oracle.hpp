#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "convexcheck/network.hpp"
#include "convexcheck/regions.hpp"

namespace convexcheck {

struct OracleWitness {
  std::vector<double> x;
  std::vector<double> y;
  double violation = 0.0;
  std::optional<std::size_t> frontier;  // exact oracle only
};

struct OracleVerdict {
  bool convex = true;
  std::optional<OracleWitness> witness;  // present iff !convex
};

inline constexpr double kMonotonicityTol = 1e-10;

/// Exact test on a partition: for every frontier, step eps along the normal
/// into both neighbours (eps halved from 1e-3 until both points are strictly
/// interior, at most 40 times) and require <u_b - u_a, x_b - x_a> >= -1e-10.
/// Handles multi-switch frontiers. Throws SolverError when a frontier cannot
/// be straddled.
OracleVerdict cpwl_convex_oracle(const Partition& partition, const FrontierSet& frontiers);

/// Midpoint test on n_pairs uniform pairs (x, y) in the box:
/// f((x+y)/2) <= (f(x)+f(y))/2 + 1e-9 (1 + max(|f(x)|, |f(y)|)).
/// A true verdict is only probabilistic evidence. Pair i draws from its own
/// stream, and the reported witness is the violating pair of lowest index, so
/// the result does not depend on the thread count.
OracleVerdict sample_convex_oracle(const Network& net, const DomainBox& box, std::size_t n_pairs, std::uint64_t seed);

/// Single-threaded reference of sample_convex_oracle; identical output.
OracleVerdict sample_convex_oracle_serial(const Network& net, const DomainBox& box, std::size_t n_pairs,
                                          std::uint64_t seed);

}  // namespace convexcheck
