#include "convexcheck/simplex.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "convexcheck/errors.hpp"

namespace convexcheck::lp {

namespace {

// Tableau layout follows the classic compact form: row i < m is a constraint,
// row m the phase-2 objective, row m + 1 the phase-1 objective. Column n is
// the artificial variable (label -1), column n + 1 the right-hand side.
class Tableau {
 public:
  Tableau(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c, double eps)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        eps_(eps),
        N_(n_ + 1),
        B_(m_),
        D_(m_ + 2, std::vector<double>(n_ + 2, 0.0)) {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < n_; ++j) D_[i][j] = A[i][j];
    for (int i = 0; i < m_; ++i) {
      B_[i] = n_ + i;
      D_[i][n_] = -1.0;
      D_[i][n_ + 1] = b[i];
    }
    for (int j = 0; j < n_; ++j) {
      N_[j] = j;
      D_[m_][j] = -c[j];
    }
    N_[n_] = -1;
    D_[m_ + 1][n_] = 1.0;
    max_iter_ = 200 * (m_ + n_ + 2) + 1000;
  }

  Solution solve() {
    Solution sol;
    if (m_ > 0) {
      int r = 0;
      for (int i = 1; i < m_; ++i)
        if (D_[i][n_ + 1] < D_[r][n_ + 1]) r = i;
      if (D_[r][n_ + 1] < -eps_) {
        pivot(r, n_);
        if (!run(2) || D_[m_ + 1][n_ + 1] < -feas_tol()) {
          sol.status = Status::Infeasible;
          return sol;
        }
        // Drive a zero-valued artificial out of the basis when possible.
        for (int i = 0; i < m_; ++i) {
          if (B_[i] != -1) continue;
          int s = -1;
          for (int j = 0; j <= n_; ++j)
            if (N_[j] != -1 && (s == -1 || std::abs(D_[i][j]) > std::abs(D_[i][s]))) s = j;
          if (s != -1 && std::abs(D_[i][s]) > eps_) pivot(i, s);
        }
      }
    }
    const bool bounded = run(1);
    sol.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i)
      if (B_[i] >= 0 && B_[i] < n_) sol.x[B_[i]] = D_[i][n_ + 1];
    sol.status = bounded ? Status::Optimal : Status::Unbounded;
    sol.objective = D_[m_][n_ + 1];
    return sol;
  }

 private:
  double feas_tol() const { return 1e-9; }

  void pivot(int r, int s) {
    const double inv = 1.0 / D_[r][s];
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r || std::abs(D_[i][s]) <= 0.0) continue;
      const double f = D_[i][s] * inv;
      for (int j = 0; j < n_ + 2; ++j) D_[i][j] -= D_[r][j] * f;
      D_[i][s] = D_[r][s] * f;
    }
    for (int j = 0; j < n_ + 2; ++j)
      if (j != s) D_[r][j] *= inv;
    for (int i = 0; i < m_ + 2; ++i)
      if (i != r) D_[i][s] *= -inv;
    D_[r][s] = inv;
    std::swap(B_[r], N_[s]);
  }

  // phase 2 -> objective row m + 1, artificial allowed to move;
  // phase 1 -> objective row m, artificial frozen out.
  bool run(int phase) {
    const int x = m_ + phase - 1;
    for (int iter = 0; iter < max_iter_; ++iter) {
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (N_[j] == -phase) continue;
        if (D_[x][j] < -eps_ && (s == -1 || N_[j] < N_[s])) s = j;
      }
      if (s == -1) return true;
      int r = -1;
      double best = 0.0;
      for (int i = 0; i < m_; ++i) {
        if (D_[i][s] <= eps_) continue;
        const double ratio = D_[i][n_ + 1] / D_[i][s];
        if (r == -1 || ratio < best - 1e-13 || (ratio <= best + 1e-13 && B_[i] < B_[r])) {
          r = i;
          best = ratio;
        }
      }
      if (r == -1) return false;
      pivot(r, s);
    }
    throw SolverError("simplex iteration cap reached (" + std::to_string(max_iter_) + " pivots)");
  }

  int m_, n_;
  double eps_;
  std::vector<int> N_, B_;
  std::vector<std::vector<double>> D_;
  int max_iter_;
};

}  // namespace

Solution maximize(const Matrix& A, const std::vector<double>& b, const std::vector<double>& c, double eps) {
  if (A.size() != b.size()) throw SolverError("LP row count mismatch");
  for (const auto& row : A)
    if (row.size() != c.size()) throw SolverError("LP column count mismatch");
  return Tableau(A, b, c, eps).solve();
}

}  // namespace convexcheck::lp
