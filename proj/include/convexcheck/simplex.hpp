#pragma once

#include <cstddef>
#include <vector>

namespace convexcheck::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
};

using Matrix = std::vector<std::vector<double>>;

/// maximize <c, x>  s.t.  A x <= b,  x >= 0.
///
/// Dense two-phase tableau simplex (single artificial variable for phase 1)
/// with Bland's smallest-index rule for both the entering and the leaving
/// variable. Meant for problems of a few hundred rows and a few dozen columns.
/// Throws SolverError if the iteration cap is hit.
Solution maximize(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c, double eps = 1e-10);

}  // namespace convexcheck::lp
