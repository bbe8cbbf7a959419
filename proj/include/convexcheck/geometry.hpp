#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace convexcheck {

/// <a, x> <= b, or < b when strict. Box rows bound the domain; every system
/// handed to the solvers must contain them, and they always take part in the
/// margin so witnesses stay inside the open box.
struct Halfspace {
  std::vector<double> a;
  double b = 0.0;
  bool strict = false;
  bool box = false;
};

/// <a, x> = b
struct Hyperplane {
  std::vector<double> a;
  double b = 0.0;
};

struct HalfspaceSystem {
  std::size_t dim = 0;
  std::vector<Halfspace> rows;

  /// Appends x_i <= hi_i and -x_i <= -lo_i for every coordinate.
  void add_box(std::span<const double> lo, std::span<const double> hi);
  bool has_box() const;
};

/// A point and the smallest slack it achieves on the strict (and box) rows.
/// Slacks are Euclidean: every row is normalised by |a| before solving.
struct FeasibilityWitness {
  std::vector<double> point;
  double margin = 0.0;
};

inline constexpr double kDefaultMarginTol = 1e-7;

/// Maximises the common slack t over strict and box rows subject to the
/// non-strict rows and the equalities. Returns nullopt when no point reaches
/// t >= 0. The returned witness has been re-substituted and checked; a
/// residual above 1e-9 throws SolverError.
std::optional<FeasibilityWitness> max_margin(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities = {});

/// max_margin, but nullopt unless the margin exceeds margin_tol.
std::optional<FeasibilityWitness> strict_feasible(const HalfspaceSystem& sys,
                                                  std::span<const Hyperplane> equalities = {},
                                                  double margin_tol = kDefaultMarginTol);

/// True iff the closed set {all rows non-strict, equalities} contains k + 1
/// affinely independent points. Grows an affinely independent set by
/// maximising and minimising along directions orthogonal to its span.
bool face_dimension_at_least(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities, std::size_t k,
                             double tol = kDefaultMarginTol);

/// Dimension of the affine hull of the closed set; -1 when empty.
int affine_dimension(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities = {},
                     double tol = kDefaultMarginTol, int stop_at = -1);

/// max <c, x> over the closed set (strict flags ignored); nullopt if empty.
std::optional<std::pair<double, std::vector<double>>> maximize_over(const HalfspaceSystem& sys,
                                                                    std::span<const Hyperplane> equalities,
                                                                    std::span<const double> c);

}  // namespace convexcheck
