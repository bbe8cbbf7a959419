#include <doctest.h>

#include <random>

#include "convexcheck/checker.hpp"
#include "convexcheck/errors.hpp"
#include "convexcheck/oracle.hpp"
#include "helpers.hpp"

using namespace convexcheck;

namespace {

struct Pipeline {
  Partition part;
  FrontierSet fs;
};

Pipeline run(const Network& net, const DomainBox& box) {
  Pipeline p;
  p.part = enumerate_regions(net, box);
  p.fs = extract_frontiers(net, p.part);
  return p;
}

bool same(const OracleVerdict& a, const OracleVerdict& b) {
  if (a.convex != b.convex || a.witness.has_value() != b.witness.has_value()) return false;
  if (!a.witness) return true;
  return a.witness->x == b.witness->x && a.witness->y == b.witness->y && a.witness->violation == b.witness->violation;
}

}  // namespace

TEST_CASE("exact oracle examples") {
  const DomainBox box = DomainBox::cube(2, 3.0);
  SUBCASE("counterexample is convex") {
    const Pipeline p = run(build_counterexample(), box);
    const OracleVerdict v = cpwl_convex_oracle(p.part, p.fs);
    CHECK(v.convex);
    CHECK_FALSE(v.witness);
  }
  SUBCASE("negative absolute value is not convex") {
    const Network net(testutil::layered(1, {{{1}, {-1}}, {{-1, -1}}}, {{0, 0}, {0}}));
    const Pipeline p = run(net, DomainBox::cube(1, 1.0));
    const OracleVerdict v = cpwl_convex_oracle(p.part, p.fs);
    CHECK_FALSE(v.convex);
    REQUIRE(v.witness);
    CHECK(v.witness->frontier == std::optional<std::size_t>(0));
    CHECK(v.witness->violation < 0.0);
  }
  SUBCASE("a single affine region is convex") {
    const Network net(testutil::layered(2, {{{1, 1}}, {{-4}}}, {{100}, {0}}));
    const Pipeline p = run(net, box);
    REQUIRE(p.part.regions.size() == 1);
    CHECK(cpwl_convex_oracle(p.part, p.fs).convex);
  }
}

TEST_CASE("sampling oracle examples") {
  const DomainBox box = DomainBox::cube(2, 3.0);
  CHECK(sample_convex_oracle(build_counterexample(), box, 100000, 1).convex);

  const OracleVerdict v = sample_convex_oracle(testutil::counterexample_with_w3(1.0, -1.0), box, 100000, 1);
  REQUIRE_FALSE(v.convex);
  REQUIRE(v.witness);
  const Network flipped = testutil::counterexample_with_w3(1.0, -1.0);
  std::vector<double> mid(2);
  for (std::size_t i = 0; i < 2; ++i) mid[i] = 0.5 * (v.witness->x[i] + v.witness->y[i]);
  const double fx = evaluate(flipped, v.witness->x), fy = evaluate(flipped, v.witness->y);
  CHECK(evaluate(flipped, mid) > 0.5 * (fx + fy));

  const Network affine(testutil::layered(2, {{{1, -1}}, {{3}}}, {{50}, {0.5}}));
  CHECK(sample_convex_oracle(affine, box, 20000, 2).convex);
  CHECK_THROWS_AS(sample_convex_oracle(affine, box, 0, 2), DimensionError);
}

TEST_CASE("sampling oracle is independent of the thread count") {
  const DomainBox box = DomainBox::cube(2, 3.0);
  for (std::uint64_t s = 0; s < 6; ++s) {
    const Network net = sample_gaussian(Architecture{2, {3, 3}, false}, 70 + s);
    CHECK(same(sample_convex_oracle(net, box, 30000, s), sample_convex_oracle_serial(net, box, 30000, s)));
  }
}

TEST_CASE("property: exactly convex networks never fail the sampler") {
  const DomainBox box = DomainBox::cube(2, 3.0);
  std::size_t convex = 0;
  for (std::uint64_t s = 0; s < 500 && convex < 40; ++s) {
    const Network net = sample_gaussian(Architecture{2, {2, 2}, false}, 5000 + s);
    const Pipeline p = run(net, box);
    if (!cpwl_convex_oracle(p.part, p.fs).convex) continue;
    ++convex;
    CHECK(sample_convex_oracle(net, box, 100000, s).convex);
  }
  CHECK(convex >= 20);
}

TEST_CASE("property: gradients of convex networks are monotone") {
  const DomainBox box = DomainBox::cube(2, 3.0);
  std::mt19937_64 rng(8);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Network net = to_icnn(sample_gaussian(Architecture{2, {3, 3}, true}, 900 + s));
    const Partition part = enumerate_regions(net, box);
    int tested = 0;
    for (int t = 0; t < 10000; ++t) {
      const auto x = testutil::random_point(rng, 2), y = testutil::random_point(rng, 2);
      const auto a = classify_point(net, part, x), b = classify_point(net, part, y);
      if (a < 0 || b < 0) continue;
      const auto& ga = part.regions[static_cast<std::size_t>(a)].f_affine.slope;
      const auto& gb = part.regions[static_cast<std::size_t>(b)].f_affine.slope;
      double ip = 0.0;
      for (std::size_t i = 0; i < 2; ++i) ip += (gb[i] - ga[i]) * (y[i] - x[i]);
      CHECK(ip >= -kMonotonicityTol * (1.0 + std::abs(ip)));
      ++tested;
    }
    CHECK(tested > 9900);
  }
}
