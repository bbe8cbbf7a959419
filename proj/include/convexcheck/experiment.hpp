#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace convexcheck {

/// Random two-hidden-layer MLPs with Gaussian parameters, counted by verdict.
struct ExperimentConfig {
  std::size_t d = 2;
  std::size_t width_min = 2;
  std::size_t width_max = 7;
  std::size_t draws = 10000;
  std::uint64_t seed = 0;
  double box_halfwidth = 100.0;  // large box as a stand-in for the whole plane
  bool skip = false;

  void validate() const;
};

struct HeatmapCell {
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  std::size_t draws = 0;
  std::size_t convex_count = 0;
  std::size_t not_convex_count = 0;
  std::size_t icnn_count = 0;
  std::size_t inconclusive_count = 0;
  std::size_t resolved_by_oracle = 0;
  std::size_t solver_errors = 0;  // included in inconclusive_count
  std::size_t icnn_not_convex = 0;  // must stay 0
  double icnn_expected = 0.0;
  double seconds = 0.0;
};

/// draws / 2^(n2 (n1 + 1)): every hidden-to-hidden and hidden-to-output
/// weight must be non-negative.
double icnn_expected(std::size_t draws, std::size_t n1, std::size_t n2);

/// Seed of draw `i` of cell (n1, n2).
std::uint64_t draw_seed(std::uint64_t seed, std::size_t n1, std::size_t n2, std::size_t i);

/// One cell, draws processed by an OpenMP pool. Results do not depend on the
/// thread count.
HeatmapCell run_cell(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2);
/// Single-threaded reference of run_cell.
HeatmapCell run_cell_serial(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2);

/// Every (n1, n2) in the width range; progress lines go to `progress` if set.
std::vector<HeatmapCell> run_experiment(const ExperimentConfig& cfg, std::ostream* progress = nullptr);

/// Columns n1,n2,draws,convex,icnn,inconclusive,icnn_expected,seconds. With
/// timing off the seconds column is 0 so that reruns are byte-identical.
void write_csv(std::ostream& out, const std::vector<HeatmapCell>& cells, bool timing = true);

}  // namespace convexcheck
