#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "convexcheck/geometry.hpp"
#include "convexcheck/network.hpp"
#include "convexcheck/pathlift.hpp"

namespace convexcheck {

/// Axis-aligned compact domain [lo, hi].
struct DomainBox {
  std::vector<double> lo;
  std::vector<double> hi;

  static DomainBox cube(std::size_t d, double halfwidth);
  std::size_t dim() const { return lo.size(); }
  std::vector<double> center() const;
  void validate() const;
};

struct RegionOptions {
  double zero_tol = 1e-9;    // |z| at or below this is "on the hyperplane"
  double margin_tol = kDefaultMarginTol;
  std::uint64_t seed = 0;
  std::size_t seed_points = 64;     // random BFS seeds besides the box center
  std::size_t probe_points = 2048;  // completeness probe after BFS
  std::size_t max_regions = 200000;
};

inline constexpr std::size_t kMaxInputDim = 16;
inline constexpr std::size_t kMaxHidden = 24;

/// One full-dimensional cell of the activation arrangement inside the box.
struct Region {
  ActivationPattern pattern;
  /// One strict row per hidden neuron whose frozen pre-activation is not
  /// constant (sign taken from the pattern), then the box rows.
  HalfspaceSystem hrep;
  /// hidden rank -> row index in hrep, or -1 when that pre-activation is
  /// constant on the region (the row is then dropped).
  std::vector<std::ptrdiff_t> row_of_hidden;
  /// Frozen pre-activations of the hidden neurons, by hidden rank.
  std::vector<AffineForm> preacts;
  AffineForm f_affine;
  FeasibilityWitness witness;

  /// Every hidden row satisfied with slack > tol (Euclidean) and x in the box.
  bool contains_strictly(std::span<const double> x, double tol = 0.0) const;
};

/// Builds the region carrying `pattern`; nullopt when its interior inside the
/// box is empty (or thinner than margin_tol).
std::optional<Region> build_region(const Network& net, const DomainBox& box, const ActivationPattern& pattern,
                                   const RegionOptions& opts = {});

struct Partition {
  std::vector<Region> regions;  // sorted by pattern
  /// False when the probe met an activation pattern that could not be
  /// realised as a region, or frontier extraction found a dangling facet.
  bool complete = true;
  std::size_t probe_misses = 0;

  std::optional<std::size_t> find(const ActivationPattern& p) const;
};

/// Breadth-first search over activation patterns through facet adjacency,
/// seeded at the box center and seed_points random points, followed by a
/// Monte-Carlo completeness probe. Flip candidates whose facet LP touches
/// the region without a strict margin are retried as multi-bit flips over
/// the hyperplanes that co-support the face.
Partition enumerate_regions(const Network& net, const DomainBox& box, const RegionOptions& opts = {});

/// Relative interior of the (d-1)-face shared by two neighbouring regions.
struct Frontier {
  std::size_t region_a = 0;  // region_a < region_b
  std::size_t region_b = 0;
  std::vector<NeuronIndex> switching;  // hidden neurons whose bit differs, hidden-rank order
  std::vector<double> witness;
  double margin = 0.0;       // distance from the witness to every other hyperplane and to the box
  std::vector<double> normal;  // unit, pointing from region_a into region_b

  bool multi_switch() const { return switching.size() > 1; }
};

struct FrontierSet {
  std::vector<Frontier> frontiers;  // sorted by (region_a, region_b)
  std::size_t dangling = 0;  // facets whose neighbour pattern is missing from the partition
  std::size_t thin = 0;      // facets narrower than margin_tol with no co-supporting hyperplane
};

FrontierSet extract_frontiers(const Network& net, const Partition& partition, const RegionOptions& opts = {});

/// Isolated-switch data of one hidden neuron.
struct NeuronIsolation {
  NeuronIndex neuron = 0;
  /// Distinct gate restrictions (downstream of the neuron) read on frontiers
  /// where this neuron is the only one switching, sorted.
  std::vector<ActivationRestriction> restrictions;
  /// For each restriction, the single-switch frontiers it was read on.
  std::vector<std::vector<std::size_t>> frontiers_of;
  std::vector<std::size_t> multi_frontiers;  // multi-switch frontiers involving the neuron
  bool never_switches = false;   // no frontier at all inside the box
  bool degenerate_only = false;  // switches only on multi-switch frontiers
};

struct IsolatedData {
  std::vector<NeuronIsolation> per_hidden;  // by hidden rank
};

/// Throws StructureError if the two sides of a single-switch frontier
/// disagree on a downstream gate.
IsolatedData isolated_data(const Network& net, const Partition& partition, const FrontierSet& frontiers);

/// Maximal affine pieces: activation regions glued across frontiers where
/// the slope does not change.
struct AffinePiece {
  std::vector<std::size_t> regions;
  AffineForm f;
};

struct PieceFrontier {
  std::size_t piece_a = 0;
  std::size_t piece_b = 0;
  std::vector<std::size_t> frontiers;  // activation frontiers on one common hyperplane
};

struct AffinePieces {
  std::vector<std::size_t> piece_of_region;
  std::vector<AffinePiece> pieces;
  std::vector<PieceFrontier> frontiers;
};

bool slopes_differ(const AffineForm& a, const AffineForm& b, double slope_tol);

AffinePieces merge_affine_pieces(const Partition& partition, const FrontierSet& frontiers, double slope_tol = 1e-8);

inline constexpr std::ptrdiff_t kOnBoundary = -1;
inline constexpr std::ptrdiff_t kUnmatched = -2;

/// Index of the region whose pattern x carries; kOnBoundary when some hidden
/// pre-activation is within clear_tol of zero, kUnmatched when the pattern is
/// not in the partition.
std::ptrdiff_t classify_point(const Network& net, const Partition& partition, std::span<const double> x,
                              double clear_tol = 1e-6);

/// classify_point over a batch, OpenMP-parallel. The serial version is the
/// reference implementation.
std::vector<std::ptrdiff_t> classify_points(const Network& net, const Partition& partition,
                                           const std::vector<std::vector<double>>& points, double clear_tol = 1e-6);
std::vector<std::ptrdiff_t> classify_points_serial(const Network& net, const Partition& partition,
                                                  const std::vector<std::vector<double>>& points,
                                                  double clear_tol = 1e-6);

/// Uniform points in the box from a seeded SplitMix64 stream.
std::vector<std::vector<double>> uniform_points(const DomainBox& box, std::size_t n, std::uint64_t seed);

}  // namespace convexcheck
