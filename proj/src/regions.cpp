#include "convexcheck/regions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "convexcheck/errors.hpp"
#include "convexcheck/parallel.hpp"
#include "convexcheck/rng.hpp"

namespace convexcheck {

namespace {

constexpr double kConstantRow = 1e-12;
constexpr double kSameHyperplaneTol = 1e-9;
constexpr double kProbeZeroTol = 1e-6;
constexpr std::size_t kMaxCoSupport = 12;

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// (a, -b) scaled to unit length.
std::vector<double> augmented_unit(const Halfspace& row) {
  std::vector<double> u(row.a);
  u.push_back(-row.b);
  const double n = norm2(u);
  for (double& v : u) v /= n;
  return u;
}

bool same_hyperplane(const Halfspace& r, const Halfspace& s) {
  const auto u = augmented_unit(r);
  const auto v = augmented_unit(s);
  double plus = 0.0, minus = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    plus = std::max(plus, std::abs(u[i] - v[i]));
    minus = std::max(minus, std::abs(u[i] + v[i]));
  }
  return std::min(plus, minus) <= kSameHyperplaneTol;
}

ActivationPattern flip(ActivationPattern p, std::size_t rank) {
  p.bits[rank] ^= 1;
  return p;
}

void check_inputs(const Network& net, const DomainBox& box) {
  box.validate();
  if (box.dim() != net.input_dim())
    throw DimensionError("box dimension " + std::to_string(box.dim()) + " does not match network input dimension " +
                         std::to_string(net.input_dim()));
  if (net.input_dim() > kMaxInputDim)
    throw GuardRailError("input dimension " + std::to_string(net.input_dim()) + " exceeds " +
                         std::to_string(kMaxInputDim));
  if (net.hidden_count() > kMaxHidden)
    throw GuardRailError("hidden neuron count " + std::to_string(net.hidden_count()) + " exceeds " +
                         std::to_string(kMaxHidden));
}

// Region rows without the row of hidden rank `h`, plus that row as an equality.
std::pair<HalfspaceSystem, Hyperplane> facet_system(const Region& r, std::size_t h) {
  const auto row = static_cast<std::size_t>(r.row_of_hidden.at(h));
  HalfspaceSystem sys;
  sys.dim = r.hrep.dim;
  for (std::size_t k = 0; k < r.hrep.rows.size(); ++k)
    if (k != row) sys.rows.push_back(r.hrep.rows[k]);
  return {std::move(sys), Hyperplane{r.hrep.rows[row].a, r.hrep.rows[row].b}};
}

std::vector<double> unit(std::vector<double> v) {
  const double n = norm2(v);
  for (double& x : v) x /= n;
  return v;
}

// Pattern just across the facet of `row` at a witness on it. Differs from a
// single flip when a neuron constant on this side starts to switch there.
ActivationPattern across(const Network& net, const Halfspace& row, const FeasibilityWitness& w) {
  const double step = std::min(1e-6, w.margin / 2);
  const auto n = unit(row.a);
  std::vector<double> x(w.point);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += step * n[i];
  return forward(net, x).pattern;
}

}  // namespace

std::ptrdiff_t classify_point(const Network& net, const Partition& partition, std::span<const double> x,
                              double clear_tol) {
  const ForwardResult fr = forward(net, x);
  for (NeuronIndex h : net.hidden())
    if (std::abs(fr.preacts[h]) <= clear_tol) return kOnBoundary;
  const auto r = partition.find(fr.pattern);
  return r ? static_cast<std::ptrdiff_t>(*r) : kUnmatched;
}

DomainBox DomainBox::cube(std::size_t d, double halfwidth) {
  if (!(halfwidth > 0.0) || !std::isfinite(halfwidth)) throw DimensionError("box half-width must be positive");
  return DomainBox{std::vector<double>(d, -halfwidth), std::vector<double>(d, halfwidth)};
}

std::vector<double> DomainBox::center() const {
  std::vector<double> c(lo.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

void DomainBox::validate() const {
  if (lo.empty() || lo.size() != hi.size()) throw DimensionError("box bounds must be non-empty and of equal length");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(lo[i] < hi[i]))
      throw DimensionError("box needs finite lo < hi in every coordinate");
}

bool Region::contains_strictly(std::span<const double> x, double tol) const {
  if (x.size() != hrep.dim) throw DimensionError("point dimension mismatch");
  for (const auto& row : hrep.rows) {
    const double n = norm2(row.a);
    const double slack = (row.b - dot(row.a, x)) / n;
    if (row.box ? slack < 0.0 : slack <= tol) return false;
  }
  return true;
}

std::optional<Region> build_region(const Network& net, const DomainBox& box, const ActivationPattern& pattern,
                                   const RegionOptions& opts) {
  if (box.dim() != net.input_dim()) throw DimensionError("box dimension does not match network input dimension");
  const auto forms = linearize(net, pattern);
  const std::size_t H = net.hidden_count();
  Region r;
  r.pattern = pattern;
  r.hrep.dim = net.input_dim();
  r.row_of_hidden.assign(H, -1);
  r.preacts.reserve(H);
  for (std::size_t h = 0; h < H; ++h) {
    const AffineForm& z = forms[net.hidden()[h]];
    r.preacts.push_back(z);
    const bool on = pattern.bits[h] != 0;
    if (norm2(z.slope) <= kConstantRow) {
      if (on != (z.offset > opts.zero_tol)) return std::nullopt;
      continue;
    }
    Halfspace row;
    row.a = z.slope;
    row.b = -z.offset;
    if (on) {
      for (double& v : row.a) v = -v;
      row.b = z.offset;
    }
    row.strict = true;
    r.row_of_hidden[h] = static_cast<std::ptrdiff_t>(r.hrep.rows.size());
    r.hrep.rows.push_back(std::move(row));
  }
  r.hrep.add_box(box.lo, box.hi);
  r.f_affine = forms[net.output()];
  auto w = strict_feasible(r.hrep, {}, opts.margin_tol);
  if (!w) return std::nullopt;
  r.witness = std::move(*w);
  return r;
}

std::optional<std::size_t> Partition::find(const ActivationPattern& p) const {
  auto it = std::lower_bound(regions.begin(), regions.end(), p,
                             [](const Region& r, const ActivationPattern& q) { return r.pattern < q; });
  if (it == regions.end() || it->pattern != p) return std::nullopt;
  return static_cast<std::size_t>(it - regions.begin());
}

std::vector<std::vector<double>> uniform_points(const DomainBox& box, std::size_t n, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<double>> pts(n, std::vector<double>(box.dim()));
  for (auto& p : pts)
    for (std::size_t i = 0; i < box.dim(); ++i) p[i] = rng.uniform(box.lo[i], box.hi[i]);
  return pts;
}

Partition enumerate_regions(const Network& net, const DomainBox& box, const RegionOptions& opts) {
  check_inputs(net, box);
  std::map<ActivationPattern, Region> found;
  std::set<ActivationPattern> tried;
  std::deque<ActivationPattern> queue;

  auto offer = [&](const ActivationPattern& p) {
    if (found.count(p)) return true;
    if (!tried.insert(p).second) return false;
    auto r = build_region(net, box, p, opts);
    if (!r) return false;
    if (found.size() >= opts.max_regions)
      throw GuardRailError("more than " + std::to_string(opts.max_regions) + " regions");
    found.emplace(p, std::move(*r));
    queue.push_back(p);
    return true;
  };

  auto drain = [&] {
    while (!queue.empty()) {
      const ActivationPattern p = queue.front();
      queue.pop_front();
      const Region& R = found.at(p);
      for (std::size_t h = 0; h < R.row_of_hidden.size(); ++h) {
        if (R.row_of_hidden[h] < 0) continue;
        auto [sys, eq] = facet_system(R, h);
        auto w = max_margin(sys, std::span<const Hyperplane>(&eq, 1));
        if (!w) continue;
        if (w->margin > opts.margin_tol) {
          if (!offer(flip(p, h))) offer(across(net, R.hrep.rows[static_cast<std::size_t>(R.row_of_hidden[h])], *w));
          continue;
        }
        // The hyperplane only touches the closure, or other hyperplanes
        // coincide with it along the face: try every flip across them.
        const Halfspace& hrow = R.hrep.rows[static_cast<std::size_t>(R.row_of_hidden[h])];
        std::vector<std::size_t> co;
        for (std::size_t k = 0; k < R.row_of_hidden.size(); ++k)
          if (k != h && R.row_of_hidden[k] >= 0 &&
              same_hyperplane(hrow, R.hrep.rows[static_cast<std::size_t>(R.row_of_hidden[k])]))
            co.push_back(k);
        if (co.size() > kMaxCoSupport) throw GuardRailError("too many coincident hyperplanes on one face");
        for (std::size_t mask = 0; mask < (std::size_t{1} << co.size()); ++mask) {
          ActivationPattern q = flip(p, h);
          for (std::size_t b = 0; b < co.size(); ++b)
            if (mask >> b & 1) q.bits[co[b]] ^= 1;
          offer(q);
        }
      }
    }
  };

  SplitMix64 rng(derive_seed(opts.seed, {0x5eed}));
  std::vector<std::vector<double>> seeds{box.center()};
  for (auto& p : uniform_points(box, opts.seed_points, rng.next())) seeds.push_back(std::move(p));
  for (const auto& x : seeds) offer(forward(net, x).pattern);
  drain();

  // Completeness probe. Patterns are computed in parallel, then consumed in
  // point order so the result does not depend on the thread count.
  const auto probe = uniform_points(box, opts.probe_points, rng.next());
  std::vector<std::optional<ActivationPattern>> seen(probe.size());
  const auto hidden = net.hidden();
  const long n_probe = static_cast<long>(probe.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long i = 0; i < n_probe; ++i) {
    ForwardResult fr = forward(net, probe[static_cast<std::size_t>(i)]);
    bool clear = true;
    for (NeuronIndex hn : hidden)
      if (std::abs(fr.preacts[hn]) <= kProbeZeroTol) clear = false;
    if (clear) seen[static_cast<std::size_t>(i)] = std::move(fr.pattern);
  }
  Partition part;
  for (const auto& p : seen) {
    if (!p || found.count(*p)) continue;
    if (offer(*p)) drain();
    else ++part.probe_misses;
  }
  part.complete = part.probe_misses == 0;
  part.regions.reserve(found.size());
  for (auto& [p, r] : found) part.regions.push_back(std::move(r));
  return part;
}

FrontierSet extract_frontiers(const Network& net, const Partition& partition, const RegionOptions& opts) {
  FrontierSet fs;
  const auto& regions = partition.regions;
  if (regions.empty()) return fs;
  const std::size_t d = regions.front().hrep.dim;
  const auto hidden = net.hidden();
  std::set<std::pair<std::size_t, std::size_t>> settled;

  auto record = [&](std::size_t i, std::size_t j, std::vector<std::size_t> ranks, FeasibilityWitness w,
                    const Halfspace& row_in_a) {
    Frontier f;
    f.region_a = i;
    f.region_b = j;
    for (auto r : ranks) f.switching.push_back(hidden[r]);
    f.witness = std::move(w.point);
    f.margin = w.margin;
    f.normal = unit(row_in_a.a);
    fs.frontiers.push_back(std::move(f));
    settled.insert({i, j});
  };

  // Single flips across a facet of each region.
  for (std::size_t i = 0; i < regions.size(); ++i) {
    const Region& R = regions[i];
    for (std::size_t h = 0; h < R.row_of_hidden.size(); ++h) {
      if (R.row_of_hidden[h] < 0) continue;
      auto j = partition.find(flip(R.pattern, h));
      auto [sys, eq] = facet_system(R, h);
      auto w = max_margin(sys, std::span<const Hyperplane>(&eq, 1));
      if (!w) {
        if (j) settled.insert({std::min(i, *j), std::max(i, *j)});
        continue;
      }
      const Halfspace& hrow = R.hrep.rows[static_cast<std::size_t>(R.row_of_hidden[h])];
      if (w->margin > opts.margin_tol) {
        if (!j) j = partition.find(across(net, hrow, *w));
        if (!j) {
          ++fs.dangling;
          continue;
        }
        if (*j < i) continue;
        // Witness strictly inside both sides.
        const Region& S = regions[*j];
        for (const auto& row : S.hrep.rows)
          if (!row.box && !same_hyperplane(hrow, row)) sys.rows.push_back(row);
        auto both = max_margin(sys, std::span<const Hyperplane>(&eq, 1));
        std::vector<std::size_t> diff;
        for (std::size_t k = 0; k < R.pattern.bits.size(); ++k)
          if (R.pattern.bits[k] != S.pattern.bits[k]) diff.push_back(k);
        record(i, *j, std::move(diff), both && both->margin > opts.margin_tol ? *both : *w, hrow);
        continue;
      }
      bool coincident = false;
      for (std::size_t k = 0; k < R.row_of_hidden.size(); ++k)
        if (k != h && R.row_of_hidden[k] >= 0 &&
            same_hyperplane(hrow, R.hrep.rows[static_cast<std::size_t>(R.row_of_hidden[k])]))
          coincident = true;
      if (coincident) continue;  // left to the pair pass below
      if (j) settled.insert({std::min(i, *j), std::max(i, *j)});
      if (face_dimension_at_least(sys, std::span<const Hyperplane>(&eq, 1), d - 1, opts.margin_tol)) ++fs.thin;
    }
  }

  // Region pairs whose differing hyperplanes all coincide: multi-switch
  // frontiers, and single switches along a face shared with a tangent
  // hyperplane.
  for (std::size_t i = 0; i < regions.size(); ++i) {
    for (std::size_t j = i + 1; j < regions.size(); ++j) {
      if (settled.count({i, j})) continue;
      const Region& A = regions[i];
      const Region& B = regions[j];
      std::vector<std::size_t> diff;
      for (std::size_t h = 0; h < A.pattern.bits.size(); ++h)
        if (A.pattern.bits[h] != B.pattern.bits[h]) diff.push_back(h);
      const std::ptrdiff_t rep_row = A.row_of_hidden[diff.front()];
      if (rep_row < 0) continue;
      const Halfspace& rep = A.hrep.rows[static_cast<std::size_t>(rep_row)];
      bool aligned = true;
      for (auto h : diff) {
        if (A.row_of_hidden[h] < 0 || B.row_of_hidden[h] < 0 ||
            !same_hyperplane(rep, A.hrep.rows[static_cast<std::size_t>(A.row_of_hidden[h])]) ||
            !same_hyperplane(rep, B.hrep.rows[static_cast<std::size_t>(B.row_of_hidden[h])])) {
          aligned = false;
          break;
        }
      }
      if (!aligned) continue;
      HalfspaceSystem sys;
      sys.dim = d;
      for (const Region* R : {&A, &B})
        for (const auto& row : R->hrep.rows)
          if (!row.box && !same_hyperplane(rep, row)) sys.rows.push_back(row);
      for (const auto& row : A.hrep.rows)
        if (row.box) sys.rows.push_back(row);
      const Hyperplane eq{rep.a, rep.b};
      auto w = max_margin(sys, std::span<const Hyperplane>(&eq, 1));
      if (!w) continue;
      if (w->margin > opts.margin_tol) record(i, j, diff, *w, rep);
      else if (face_dimension_at_least(sys, std::span<const Hyperplane>(&eq, 1), d - 1, opts.margin_tol)) ++fs.thin;
    }
  }

  std::sort(fs.frontiers.begin(), fs.frontiers.end(), [](const Frontier& a, const Frontier& b) {
    return std::tie(a.region_a, a.region_b) < std::tie(b.region_a, b.region_b);
  });
  return fs;
}

IsolatedData isolated_data(const Network& net, const Partition& partition, const FrontierSet& frontiers) {
  const auto hidden = net.hidden();
  IsolatedData out;
  out.per_hidden.resize(hidden.size());
  std::vector<std::map<ActivationRestriction, std::vector<std::size_t>>> seen(hidden.size());
  std::vector<Subgraph> subs;
  subs.reserve(hidden.size());
  for (NeuronIndex n : hidden) subs.push_back(subgraph_after(net, n));

  for (std::size_t f = 0; f < frontiers.frontiers.size(); ++f) {
    const Frontier& fr = frontiers.frontiers[f];
    if (fr.multi_switch()) {
      for (NeuronIndex n : fr.switching) out.per_hidden[net.hidden_rank(n)].multi_frontiers.push_back(f);
      continue;
    }
    const std::size_t h = net.hidden_rank(fr.switching.front());
    const auto ra = restrict_pattern(net, subs[h], partition.regions.at(fr.region_a).pattern);
    const auto rb = restrict_pattern(net, subs[h], partition.regions.at(fr.region_b).pattern);
    if (ra != rb)
      throw StructureError("downstream gates of '" + net.id(hidden[h]) + "' differ across its own frontier");
    seen[h][ra].push_back(f);
  }
  for (std::size_t h = 0; h < hidden.size(); ++h) {
    NeuronIsolation& iso = out.per_hidden[h];
    iso.neuron = hidden[h];
    for (auto& [r, fl] : seen[h]) {
      iso.restrictions.push_back(r);
      iso.frontiers_of.push_back(std::move(fl));
    }
    iso.never_switches = iso.restrictions.empty() && iso.multi_frontiers.empty();
    iso.degenerate_only = iso.restrictions.empty() && !iso.multi_frontiers.empty();
  }
  return out;
}

std::vector<std::ptrdiff_t> classify_points_serial(const Network& net, const Partition& partition,
                                                  const std::vector<std::vector<double>>& points, double clear_tol) {
  std::vector<std::ptrdiff_t> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = classify_point(net, partition, points[i], clear_tol);
  return out;
}

std::vector<std::ptrdiff_t> classify_points(const Network& net, const Partition& partition,
                                           const std::vector<std::vector<double>>& points, double clear_tol) {
  std::vector<std::ptrdiff_t> out(points.size());
  const long n = static_cast<long>(points.size());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (long i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] = classify_point(net, partition, points[static_cast<std::size_t>(i)], clear_tol);
  return out;
}

bool slopes_differ(const AffineForm& a, const AffineForm& b, double slope_tol) {
  for (std::size_t i = 0; i < a.slope.size(); ++i)
    if (std::abs(a.slope[i] - b.slope[i]) > slope_tol) return true;
  return false;
}

AffinePieces merge_affine_pieces(const Partition& partition, const FrontierSet& frontiers, double slope_tol) {
  const std::size_t n = partition.regions.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto root = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& f : frontiers.frontiers)
    if (!slopes_differ(partition.regions[f.region_a].f_affine, partition.regions[f.region_b].f_affine, slope_tol))
      parent[root(f.region_b)] = root(f.region_a);

  AffinePieces out;
  out.piece_of_region.assign(n, 0);
  std::map<std::size_t, std::size_t> piece_of_root;
  for (std::size_t r = 0; r < n; ++r) {
    auto [it, fresh] = piece_of_root.emplace(root(r), out.pieces.size());
    if (fresh) out.pieces.push_back({{}, partition.regions[r].f_affine});
    out.piece_of_region[r] = it->second;
    out.pieces[it->second].regions.push_back(r);
  }

  // Group activation frontiers between distinct pieces by piece pair and
  // supporting hyperplane.
  struct Key {
    std::size_t a, b;
    Halfspace plane;
  };
  std::vector<Key> keys;
  for (std::size_t k = 0; k < frontiers.frontiers.size(); ++k) {
    const Frontier& f = frontiers.frontiers[k];
    std::size_t pa = out.piece_of_region[f.region_a];
    std::size_t pb = out.piece_of_region[f.region_b];
    if (pa == pb) continue;
    if (pa > pb) std::swap(pa, pb);
    Halfspace plane;
    plane.a = f.normal;
    plane.b = dot(f.normal, f.witness);
    bool placed = false;
    for (std::size_t g = 0; g < keys.size() && !placed; ++g) {
      if (keys[g].a == pa && keys[g].b == pb && same_hyperplane(keys[g].plane, plane)) {
        out.frontiers[g].frontiers.push_back(k);
        placed = true;
      }
    }
    if (!placed) {
      keys.push_back({pa, pb, plane});
      out.frontiers.push_back({pa, pb, {k}});
    }
  }
  return out;
}

}  // namespace convexcheck
