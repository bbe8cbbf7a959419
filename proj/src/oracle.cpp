#include "convexcheck/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "convexcheck/errors.hpp"
#include "convexcheck/parallel.hpp"
#include "convexcheck/rng.hpp"

namespace convexcheck {

namespace {

constexpr double kEpsStart = 1e-3;
constexpr int kBisections = 40;
constexpr std::size_t kChunk = 4096;

struct PairResult {
  bool violated = false;
  OracleWitness w;
};

PairResult test_pair(const Network& net, const DomainBox& box, std::uint64_t seed, std::size_t i) {
  SplitMix64 rng(derive_seed(seed, {i}));
  const std::size_t d = box.dim();
  std::vector<double> x(d), y(d), m(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = rng.uniform(box.lo[k], box.hi[k]);
  for (std::size_t k = 0; k < d; ++k) y[k] = rng.uniform(box.lo[k], box.hi[k]);
  for (std::size_t k = 0; k < d; ++k) m[k] = 0.5 * (x[k] + y[k]);
  const double fx = evaluate(net, x);
  const double fy = evaluate(net, y);
  const double fm = evaluate(net, m);
  const double gap = fm - 0.5 * (fx + fy);
  PairResult r;
  if (gap > 1e-9 * (1.0 + std::max(std::abs(fx), std::abs(fy)))) {
    r.violated = true;
    r.w = {std::move(x), std::move(y), gap, std::nullopt};
  }
  return r;
}

void check_sampler_args(const Network& net, const DomainBox& box, std::size_t n_pairs) {
  box.validate();
  if (box.dim() != net.input_dim()) throw DimensionError("box dimension does not match network input dimension");
  if (n_pairs < 1) throw DimensionError("sampling oracle needs at least one pair");
}

}  // namespace

OracleVerdict cpwl_convex_oracle(const Partition& partition, const FrontierSet& frontiers) {
  OracleVerdict v;
  for (std::size_t f = 0; f < frontiers.frontiers.size(); ++f) {
    const Frontier& fr = frontiers.frontiers[f];
    const Region& A = partition.regions.at(fr.region_a);
    const Region& B = partition.regions.at(fr.region_b);
    const std::size_t d = fr.witness.size();
    std::vector<double> xa(d), xb(d);
    bool placed = false;
    double eps = kEpsStart;
    for (int it = 0; it <= kBisections && !placed; ++it, eps *= 0.5) {
      for (std::size_t k = 0; k < d; ++k) {
        xa[k] = fr.witness[k] - eps * fr.normal[k];
        xb[k] = fr.witness[k] + eps * fr.normal[k];
      }
      placed = A.contains_strictly(xa) && B.contains_strictly(xb);
    }
    if (!placed)
      throw SolverError("could not place points on both sides of frontier " + std::to_string(fr.region_a) + "/" +
                        std::to_string(fr.region_b));
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (B.f_affine.slope[k] - A.f_affine.slope[k]) * (xb[k] - xa[k]);
    if (s < -kMonotonicityTol && v.convex) {
      v.convex = false;
      v.witness = OracleWitness{xa, xb, s, f};
    }
  }
  return v;
}

OracleVerdict sample_convex_oracle_serial(const Network& net, const DomainBox& box, std::size_t n_pairs,
                                          std::uint64_t seed) {
  check_sampler_args(net, box, n_pairs);
  for (std::size_t i = 0; i < n_pairs; ++i) {
    PairResult r = test_pair(net, box, seed, i);
    if (r.violated) return {false, std::move(r.w)};
  }
  return {};
}

OracleVerdict sample_convex_oracle(const Network& net, const DomainBox& box, std::size_t n_pairs, std::uint64_t seed) {
  check_sampler_args(net, box, n_pairs);
  const int threads = thread_count();
  for (std::size_t start = 0; start < n_pairs; start += kChunk) {
    const std::size_t end = std::min(n_pairs, start + kChunk);
    long first = std::numeric_limits<long>::max();
#pragma omp parallel for schedule(static) num_threads(threads) reduction(min : first)
    for (long i = static_cast<long>(start); i < static_cast<long>(end); ++i)
      if (test_pair(net, box, seed, static_cast<std::size_t>(i)).violated) first = std::min(first, i);
    if (first != std::numeric_limits<long>::max()) {
      PairResult r = test_pair(net, box, seed, static_cast<std::size_t>(first));
      return {false, std::move(r.w)};
    }
  }
  return {};
}

}  // namespace convexcheck
