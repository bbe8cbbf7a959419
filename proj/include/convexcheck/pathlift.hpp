#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "convexcheck/network.hpp"

namespace convexcheck {

/// The largest sub-DAG having `root` as its only input and the network output
/// as its output: every neuron reachable from root that can still reach the
/// output, and the edges between them.
struct Subgraph {
  NeuronIndex root = 0;
  std::vector<NeuronIndex> nodes;         // topological order, root first
  std::vector<std::size_t> edges;         // indices into Network::edges()
  std::vector<NeuronIndex> gated;         // hidden nodes other than root (restriction domain)
  std::vector<bool> member;               // indexed by NeuronIndex

  bool contains(NeuronIndex n) const { return n < member.size() && member[n]; }
};

Subgraph subgraph_after(const Network& net, NeuronIndex root);

/// Binary gates for the hidden neurons of subgraph_after(root), root excluded.
/// The activation of a path leaving root is the product of the gates it meets.
struct ActivationRestriction {
  NeuronIndex root = 0;
  std::vector<NeuronIndex> neurons;  // == Subgraph::gated
  std::vector<std::uint8_t> bits;

  friend auto operator<=>(const ActivationRestriction&, const ActivationRestriction&) = default;
};

/// Reads the gates of `sub` off a full activation pattern.
ActivationRestriction restrict_pattern(const Network& net, const Subgraph& sub, const ActivationPattern& pattern);

/// <restriction, path-lifting from root>: pushes the value 1 from root through
/// the subgraph with all biases dropped and each hidden neuron replaced by
/// z -> bit * z.
double inner_product_fast(const Network& net, const Subgraph& sub, const ActivationRestriction& restriction);
double inner_product_fast(const Network& net, NeuronIndex root, const ActivationRestriction& restriction);

inline constexpr double kMaxPaths = 1e6;

struct Path {
  std::vector<NeuronIndex> nodes;  // root ... output
  double weight = 0.0;             // product of edge weights along the path
};

struct PathVector {
  NeuronIndex root = 0;
  std::vector<Path> paths;
};

/// Number of root -> output paths, by dynamic programming over the DAG.
double count_paths(const Network& net, NeuronIndex root);

/// Explicit root -> output path enumeration. Throws GuardRailError above
/// kMaxPaths paths.
PathVector enumerate_paths(const Network& net, NeuronIndex root);

/// Sum over paths of (product of gates met after the root) x (path weight).
double inner_product_explicit(const PathVector& pv, const ActivationRestriction& restriction);

/// One coordinate of the full path-lifting: a path ending at the output,
/// starting at an input (plain weight product), a hidden neuron (its bias
/// times the product) or the output itself (its bias).
struct LiftedPath {
  std::vector<NeuronIndex> nodes;
  double phi = 0.0;
};

std::vector<LiftedPath> enumerate_all_paths(const Network& net);

/// x-dependent factor of a lifted path: product of the activations of every
/// hidden neuron on it, times x_{start} for input starts.
double path_activation_term(const Network& net, const LiftedPath& path, const ForwardResult& fwd,
                            std::span<const double> x);

/// (forward value, scalar product of the full path-lifting with the
/// path-activation matrix applied to (x, 1)).
std::pair<double, double> full_pathlift_identity_check(const Network& net, std::span<const double> x);

}  // namespace convexcheck
