#include "convexcheck/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "convexcheck/errors.hpp"
#include "convexcheck/simplex.hpp"

namespace convexcheck {

namespace {

constexpr double kResidualTol = 1e-9;
constexpr double kMarginCap = 1e6;

struct NormalRow {
  std::vector<double> a;
  double b;
  bool in_margin;  // strict or box
};

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
  return s;
}

NormalRow normalise(std::span<const double> a, double b, bool in_margin) {
  NormalRow r{std::vector<double>(a.begin(), a.end()), b, in_margin};
  const double n = norm2(a);
  if (n > 1e-12) {
    for (double& v : r.a) v /= n;
    r.b /= n;
  }
  return r;
}

void check_dims(const HalfspaceSystem& sys, std::span<const Hyperplane> eq) {
  if (sys.dim == 0) throw SolverError("halfspace system of dimension 0");
  for (const auto& r : sys.rows) {
    if (r.a.size() != sys.dim) throw DimensionError("halfspace row dimension mismatch");
    for (double v : r.a)
      if (!std::isfinite(v)) throw SolverError("non-finite halfspace coefficient");
    if (!std::isfinite(r.b)) throw SolverError("non-finite halfspace offset");
  }
  for (const auto& e : eq)
    if (e.a.size() != sys.dim) throw DimensionError("equality row dimension mismatch");
  if (!sys.has_box()) throw SolverError("halfspace system has no box rows; the LP could be unbounded");
}

// Free x is split as x = p - q with p, q >= 0. When with_margin, a last column
// t >= 0 is added with coefficient 1 on every in-margin row.
struct LpBuild {
  lp::Matrix A;
  std::vector<double> b;
  std::vector<NormalRow> rows;
  std::vector<NormalRow> eqs;
};

LpBuild build(const HalfspaceSystem& sys, std::span<const Hyperplane> eq, bool with_margin) {
  const std::size_t d = sys.dim;
  const std::size_t cols = 2 * d + (with_margin ? 1 : 0);
  LpBuild out;
  auto push = [&](const std::vector<double>& a, double b, double t_coef) {
    std::vector<double> row(cols, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      row[i] = a[i];
      row[d + i] = -a[i];
    }
    if (with_margin) row[2 * d] = t_coef;
    out.A.push_back(std::move(row));
    out.b.push_back(b);
  };
  for (const auto& r : sys.rows) {
    NormalRow nr = normalise(r.a, r.b, r.strict || r.box);
    push(nr.a, nr.b, nr.in_margin ? 1.0 : 0.0);
    out.rows.push_back(std::move(nr));
  }
  for (const auto& e : eq) {
    NormalRow nr = normalise(e.a, e.b, false);
    std::vector<double> neg(nr.a.size());
    for (std::size_t i = 0; i < d; ++i) neg[i] = -nr.a[i];
    push(nr.a, nr.b, 0.0);
    push(neg, -nr.b, 0.0);
    out.eqs.push_back(std::move(nr));
  }
  if (with_margin) {
    std::vector<double> row(cols, 0.0);
    row[2 * d] = 1.0;
    out.A.push_back(std::move(row));
    out.b.push_back(kMarginCap);
  }
  return out;
}

std::vector<double> recover(const std::vector<double>& sol, std::size_t d) {
  std::vector<double> x(d);
  for (std::size_t i = 0; i < d; ++i) x[i] = sol[i] - sol[d + i];
  return x;
}

// Re-substitution pass; returns the achieved margin over in-margin rows.
double validate(const LpBuild& lpb, const std::vector<double>& x) {
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& r : lpb.rows) {
    const double slack = r.b - dot(r.a, x);
    if (r.in_margin) margin = std::min(margin, slack);
    else if (slack < -kResidualTol)
      throw SolverError("LP witness violates a row by " + std::to_string(-slack));
  }
  for (const auto& e : lpb.eqs) {
    const double res = std::abs(dot(e.a, x) - e.b);
    if (res > kResidualTol) throw SolverError("LP witness violates an equality by " + std::to_string(res));
  }
  return margin;
}

}  // namespace

void HalfspaceSystem::add_box(std::span<const double> lo, std::span<const double> hi) {
  if (lo.size() != dim || hi.size() != dim) throw DimensionError("box dimension mismatch");
  for (std::size_t i = 0; i < dim; ++i) {
    std::vector<double> a(dim, 0.0);
    a[i] = 1.0;
    rows.push_back({a, hi[i], false, true});
    a[i] = -1.0;
    rows.push_back({a, -lo[i], false, true});
  }
}

bool HalfspaceSystem::has_box() const {
  return std::any_of(rows.begin(), rows.end(), [](const Halfspace& r) { return r.box; });
}

std::optional<FeasibilityWitness> max_margin(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities) {
  check_dims(sys, equalities);
  const std::size_t d = sys.dim;
  LpBuild lpb = build(sys, equalities, true);
  std::vector<double> c(2 * d + 1, 0.0);
  c[2 * d] = 1.0;
  const lp::Solution sol = lp::maximize(lpb.A, lpb.b, c);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (sol.status == lp::Status::Unbounded) throw SolverError("margin LP unbounded despite box rows");
  FeasibilityWitness w;
  w.point = recover(sol.x, d);
  w.margin = validate(lpb, w.point);
  if (w.margin < -kResidualTol) throw SolverError("LP witness has negative margin " + std::to_string(w.margin));
  w.margin = std::max(w.margin, 0.0);
  return w;
}

std::optional<FeasibilityWitness> strict_feasible(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities,
                                                  double margin_tol) {
  auto w = max_margin(sys, equalities);
  if (!w || w->margin <= margin_tol) return std::nullopt;
  return w;
}

std::optional<std::pair<double, std::vector<double>>> maximize_over(const HalfspaceSystem& sys,
                                                                    std::span<const Hyperplane> equalities,
                                                                    std::span<const double> c) {
  check_dims(sys, equalities);
  const std::size_t d = sys.dim;
  if (c.size() != d) throw DimensionError("objective dimension mismatch");
  LpBuild lpb = build(sys, equalities, false);
  std::vector<double> obj(2 * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    obj[i] = c[i];
    obj[d + i] = -c[i];
  }
  const lp::Solution sol = lp::maximize(lpb.A, lpb.b, obj);
  if (sol.status == lp::Status::Infeasible) return std::nullopt;
  if (sol.status == lp::Status::Unbounded) throw SolverError("LP unbounded despite box rows");
  auto x = recover(sol.x, d);
  for (const auto& r : lpb.rows)
    if (r.b - dot(r.a, x) < -kResidualTol) throw SolverError("LP optimum violates a row");
  for (const auto& e : lpb.eqs)
    if (std::abs(dot(e.a, x) - e.b) > kResidualTol) throw SolverError("LP optimum violates an equality");
  return std::make_pair(dot(c, x), std::move(x));
}

int affine_dimension(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities, double tol, int stop_at) {
  const std::size_t d = sys.dim;
  std::vector<double> zero(d, 0.0);
  auto first = maximize_over(sys, equalities, zero);
  if (!first) return -1;
  const std::vector<double> p0 = first->second;
  std::vector<std::vector<double>> basis;  // orthonormal span of (p_i - p0)

  auto orthogonalise = [&](std::vector<double> v) {
    for (const auto& u : basis) {
      const double proj = dot(u, v);
      for (std::size_t i = 0; i < d; ++i) v[i] -= proj * u[i];
    }
    return v;
  };

  bool grown = true;
  while (grown && basis.size() < d) {
    if (stop_at >= 0 && static_cast<int>(basis.size()) >= stop_at) break;
    grown = false;
    for (std::size_t axis = 0; axis < d && !grown; ++axis) {
      std::vector<double> dir(d, 0.0);
      dir[axis] = 1.0;
      dir = orthogonalise(dir);
      const double n = norm2(dir);
      if (n < 1e-6) continue;
      for (double& v : dir) v /= n;
      const double base = dot(dir, p0);
      for (double sign : {1.0, -1.0}) {
        std::vector<double> c(dir);
        for (double& v : c) v *= sign;
        auto best = maximize_over(sys, equalities, c);
        if (!best) throw SolverError("feasible set became empty during dimension probe");
        if (best->first - sign * base > tol) {
          std::vector<double> v(d);
          for (std::size_t i = 0; i < d; ++i) v[i] = best->second[i] - p0[i];
          v = orthogonalise(v);
          const double vn = norm2(v);
          if (vn <= tol) continue;
          for (double& x : v) x /= vn;
          basis.push_back(std::move(v));
          grown = true;
          break;
        }
      }
    }
  }
  return static_cast<int>(basis.size());
}

bool face_dimension_at_least(const HalfspaceSystem& sys, std::span<const Hyperplane> equalities, std::size_t k,
                             double tol) {
  if (k > sys.dim) throw DimensionError("face dimension query above ambient dimension");
  return affine_dimension(sys, equalities, tol, static_cast<int>(k)) >= static_cast<int>(k);
}

}  // namespace convexcheck
