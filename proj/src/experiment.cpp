#include "convexcheck/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "convexcheck/checker.hpp"
#include "convexcheck/errors.hpp"
#include "convexcheck/parallel.hpp"
#include "convexcheck/rng.hpp"

namespace convexcheck {

namespace {

struct DrawOutcome {
  Status status = Status::Inconclusive;
  bool icnn = false;
  bool resolved = false;
  bool error = false;
};

DrawOutcome run_draw(const ExperimentConfig& cfg, const DomainBox& box, std::size_t n1, std::size_t n2,
                     std::size_t i) {
  const std::uint64_t s = draw_seed(cfg.seed, n1, n2, i);
  const Network net = sample_gaussian(Architecture{cfg.d, {n1, n2}, cfg.skip}, s);
  CheckOptions opts;
  opts.regions.seed = splitmix64(s);
  DrawOutcome o;
  o.icnn = is_icnn(net);
  try {
    const ConvexityReport rep = check_convexity(net, box, opts);
    o.status = rep.status;
    o.resolved = rep.resolved_by_oracle;
  } catch (const SolverError&) {
    o.error = true;  // counted as inconclusive
  } catch (const GuardRailError&) {
    o.error = true;
  }
  return o;
}

HeatmapCell tally(const std::vector<DrawOutcome>& out, std::size_t n1, std::size_t n2) {
  HeatmapCell c;
  c.n1 = n1;
  c.n2 = n2;
  c.draws = out.size();
  c.icnn_expected = icnn_expected(out.size(), n1, n2);
  for (const auto& o : out) {
    if (o.status == Status::Convex) ++c.convex_count;
    if (o.status == Status::NotConvex) ++c.not_convex_count;
    if (o.status == Status::Inconclusive) ++c.inconclusive_count;
    if (o.resolved) ++c.resolved_by_oracle;
    if (o.error) ++c.solver_errors;
    if (o.icnn) ++c.icnn_count;
    if (o.icnn && o.status == Status::NotConvex) ++c.icnn_not_convex;
  }
  return c;
}

HeatmapCell run_cell_impl(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2, bool parallel) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const DomainBox box = DomainBox::cube(cfg.d, cfg.box_halfwidth);
  std::vector<DrawOutcome> out(cfg.draws);
  const long n = static_cast<long>(cfg.draws);
  const int threads = parallel ? thread_count() : 1;
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_draw(cfg, box, n1, n2, static_cast<std::size_t>(i));
  HeatmapCell c = tally(out, n1, n2);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (draws < 1) throw DimensionError("experiment needs draws >= 1");
  if (d < 1) throw DimensionError("experiment needs d >= 1");
  if (width_min < 1 || width_min > width_max) throw DimensionError("invalid width range");
  if (d > kMaxInputDim || 2 * width_max > kMaxHidden)
    throw GuardRailError("experiment widths exceed the region enumeration guard rails");
  if (!(box_halfwidth > 0.0) || !std::isfinite(box_halfwidth)) throw DimensionError("box half-width must be positive");
}

double icnn_expected(std::size_t draws, std::size_t n1, std::size_t n2) {
  return static_cast<double>(draws) / std::ldexp(1.0, static_cast<int>(n2 * (n1 + 1)));
}

std::uint64_t draw_seed(std::uint64_t seed, std::size_t n1, std::size_t n2, std::size_t i) {
  return derive_seed(seed, {n1, n2, i});
}

HeatmapCell run_cell(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2) {
  return run_cell_impl(cfg, n1, n2, true);
}

HeatmapCell run_cell_serial(const ExperimentConfig& cfg, std::size_t n1, std::size_t n2) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const DomainBox box = DomainBox::cube(cfg.d, cfg.box_halfwidth);
  std::vector<DrawOutcome> out;
  out.reserve(cfg.draws);
  for (std::size_t i = 0; i < cfg.draws; ++i) out.push_back(run_draw(cfg, box, n1, n2, i));
  HeatmapCell c = tally(out, n1, n2);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

std::vector<HeatmapCell> run_experiment(const ExperimentConfig& cfg, std::ostream* progress) {
  cfg.validate();
  std::vector<HeatmapCell> cells;
  for (std::size_t n1 = cfg.width_min; n1 <= cfg.width_max; ++n1) {
    for (std::size_t n2 = cfg.width_min; n2 <= cfg.width_max; ++n2) {
      cells.push_back(run_cell(cfg, n1, n2));
      if (progress) {
        const HeatmapCell& c = cells.back();
        *progress << "cell (" << n1 << "," << n2 << "): convex " << c.convex_count << ", icnn " << c.icnn_count
                  << ", inconclusive " << c.inconclusive_count << ", " << c.seconds << " s\n";
      }
    }
  }
  return cells;
}

void write_csv(std::ostream& out, const std::vector<HeatmapCell>& cells, bool timing) {
  out << "n1,n2,draws,convex,icnn,inconclusive,icnn_expected,seconds\n";
  char buf[64];
  for (const auto& c : cells) {
    std::snprintf(buf, sizeof buf, "%.17g", c.icnn_expected);
    out << c.n1 << ',' << c.n2 << ',' << c.draws << ',' << c.convex_count << ',' << c.icnn_count << ','
        << c.inconclusive_count << ',' << buf << ',';
    std::snprintf(buf, sizeof buf, "%.3f", timing ? c.seconds : 0.0);
    out << buf << '\n';
  }
}

}  // namespace convexcheck
