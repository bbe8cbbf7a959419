#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>

#include "convexcheck/errors.hpp"
#include "convexcheck/pathlift.hpp"
#include "helpers.hpp"

using namespace convexcheck;

namespace {

ActivationRestriction with_bits(const Subgraph& sub, std::vector<std::uint8_t> bits) {
  return ActivationRestriction{sub.root, sub.gated, std::move(bits)};
}

Network random_net(std::mt19937_64& rng, std::uint64_t seed, std::size_t max_layers) {
  std::uniform_int_distribution<std::size_t> layers(1, max_layers), width(1, 4), dim(1, 3);
  if (seed % 3 == 0) return testutil::random_dag(seed, dim(rng), 2 + seed % 7);
  Architecture arch{dim(rng), {}, seed % 3 == 2};
  const std::size_t L = layers(rng);
  for (std::size_t l = 0; l < L; ++l) arch.widths.push_back(width(rng));
  return sample_gaussian(arch, seed);
}

// Paths from the inputs into `root`, built by walking edges backwards.
std::vector<Path> paths_into(const Network& net, NeuronIndex root) {
  std::vector<Path> out;
  std::vector<NeuronIndex> stack{root};
  auto walk = [&](auto&& self, NeuronIndex v, double w) -> void {
    if (net.kind(v) == NeuronKind::Input) {
      Path p;
      p.nodes.assign(stack.rbegin(), stack.rend());
      p.weight = w;
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t e : net.incoming(v)) {
      const Edge& edge = net.edges()[e];
      stack.push_back(edge.src);
      self(self, edge.src, w * edge.weight);
      stack.pop_back();
    }
  };
  walk(walk, root, 1.0);
  return out;
}

Network scale_outgoing(const Network& net, NeuronIndex n, double lambda) {
  NetworkDescription d = net.describe();
  for (auto& e : d.edges)
    if (e.src == net.id(n)) e.weight *= lambda;
  return Network(d);
}

}  // namespace

TEST_CASE("subgraph_after") {
  const Network net = build_counterexample();
  const NeuronIndex mu1 = net.index_of("mu1"), nu1 = net.index_of("nu1"), nu2 = net.index_of("nu2");
  const Subgraph s = subgraph_after(net, mu1);
  CHECK(s.nodes == std::vector<NeuronIndex>{mu1, nu1, nu2, net.output()});
  CHECK(s.edges.size() == 4);
  CHECK(s.gated == std::vector<NeuronIndex>{nu1, nu2});

  const Subgraph last = subgraph_after(net, nu1);
  CHECK(last.nodes == std::vector<NeuronIndex>{nu1, net.output()});
  REQUIRE(last.edges.size() == 1);
  CHECK(net.edges()[last.edges[0]].dst == net.output());
  CHECK(last.gated.empty());

  CHECK_THROWS_AS(subgraph_after(net, net.index_of("x1")), StructureError);
  CHECK_THROWS_AS(subgraph_after(net, net.output()), StructureError);
}

TEST_CASE("inner products on the counterexample") {
  const Network net = build_counterexample();
  const NeuronIndex mu1 = net.index_of("mu1");
  const Subgraph s = subgraph_after(net, mu1);
  CHECK(inner_product_fast(net, s, with_bits(s, {1, 1})) == 1.0);
  CHECK(inner_product_fast(net, s, with_bits(s, {1, 0})) == -1.0);
  CHECK(inner_product_fast(net, s, with_bits(s, {0, 1})) == 2.0);
  CHECK(inner_product_fast(net, s, with_bits(s, {0, 0})) == 0.0);

  const PathVector pv = enumerate_paths(net, mu1);
  REQUIRE(pv.paths.size() == 2);
  std::vector<double> w{pv.paths[0].weight, pv.paths[1].weight};
  std::sort(w.begin(), w.end());
  CHECK(w == std::vector<double>{-1.0, 2.0});
  CHECK(inner_product_explicit(pv, with_bits(s, {0, 1})) == 2.0);
  CHECK(inner_product_explicit(pv, with_bits(s, {1, 1})) == 1.0);
  CHECK(inner_product_explicit(pv, with_bits(s, {0, 0})) == 0.0);

  // A last-layer neuron reduces to its output weight.
  const Network flipped = testutil::counterexample_with_w3(0.75, -2.0);
  const NeuronIndex nu2 = flipped.index_of("nu2");
  CHECK(inner_product_fast(flipped, nu2, ActivationRestriction{nu2, {}, {}}) == -2.0);
  const PathVector single = enumerate_paths(flipped, nu2);
  REQUIRE(single.paths.size() == 1);
  CHECK(single.paths[0].weight == -2.0);
  CHECK(count_paths(net, mu1) == 2.0);
}

TEST_CASE("full path-lifting identity examples") {
  const Network net = build_counterexample();
  const std::vector<double> x{1.0, 1.0};
  const auto [lhs, rhs] = full_pathlift_identity_check(net, x);
  CHECK(lhs == doctest::Approx(2.5));
  CHECK(rhs == doctest::Approx(2.5));

  const Network nobias = testutil::random_dag(4, 2, 5, 0.4, false);
  const std::vector<double> zero{0.0, 0.0};
  const auto [l0, r0] = full_pathlift_identity_check(nobias, zero);
  CHECK(l0 == 0.0);
  CHECK(r0 == 0.0);
}

TEST_CASE("chain network has a single path") {
  const Network net(testutil::layered(1, {{{2}}, {{3}}, {{-1}}, {{0.5}}}, {{0.1}, {0.2}, {0.3}, {0}}));
  const NeuronIndex h1 = net.hidden()[0];
  const PathVector pv = enumerate_paths(net, h1);
  REQUIRE(pv.paths.size() == 1);
  CHECK(pv.paths[0].weight == -1.5);
  CHECK(pv.paths[0].nodes.size() == 4);
  const Subgraph s = subgraph_after(net, h1);
  CHECK(inner_product_explicit(pv, with_bits(s, {1, 1})) == -1.5);
  CHECK(inner_product_explicit(pv, with_bits(s, {1, 0})) == 0.0);
  CHECK(inner_product_fast(net, s, with_bits(s, {1, 1})) == -1.5);
}

TEST_CASE("guard rails and domain checks") {
  const Network wide = sample_gaussian(Architecture{1, std::vector<std::size_t>(8, 10), false}, 2);
  CHECK(count_paths(wide, wide.hidden()[0]) == 1e7);
  CHECK_THROWS_AS(enumerate_paths(wide, wide.hidden()[0]), GuardRailError);
  CHECK_THROWS_AS(full_pathlift_identity_check(wide, std::vector<double>{0.0}), GuardRailError);
  // The fast evaluation does not enumerate, so it still works.
  const Subgraph s = subgraph_after(wide, wide.hidden()[0]);
  CHECK_NOTHROW(inner_product_fast(wide, s, with_bits(s, std::vector<std::uint8_t>(s.gated.size(), 1))));

  const Network net = build_counterexample();
  const NeuronIndex mu1 = net.index_of("mu1");
  CHECK_THROWS_AS(inner_product_fast(net, mu1, ActivationRestriction{mu1, {net.index_of("nu1")}, {1}}),
                  StructureError);
  CHECK_THROWS_AS(inner_product_fast(net, mu1, ActivationRestriction{mu1, subgraph_after(net, mu1).gated, {1}}),
                  StructureError);
  const NeuronIndex mu2 = net.index_of("mu2");
  CHECK_THROWS_AS(inner_product_explicit(enumerate_paths(net, mu1),
                                         ActivationRestriction{mu2, subgraph_after(net, mu2).gated, {1, 1}}),
                  StructureError);
}

TEST_CASE("property: forward value equals the full path-lifting scalar product") {
  std::mt19937_64 rng(17);
  for (std::uint64_t t = 0; t < 200; ++t) {
    const Network net = random_net(rng, 500 + t, 3);
    const auto x = testutil::random_point(rng, net.input_dim());
    const auto [lhs, rhs] = full_pathlift_identity_check(net, x);
    CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("property: fast and explicit inner products agree") {
  std::mt19937_64 rng(23);
  for (std::uint64_t t = 0; t < 500; ++t) {
    const Network net = random_net(rng, 9000 + t, 4);
    const auto hidden = net.hidden();
    const NeuronIndex nu = hidden[std::uniform_int_distribution<std::size_t>(0, hidden.size() - 1)(rng)];
    const Subgraph s = subgraph_after(net, nu);
    std::vector<std::uint8_t> bits(s.gated.size());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
    const auto r = with_bits(s, bits);
    const double fast = inner_product_fast(net, s, r);
    const double slow = inner_product_explicit(enumerate_paths(net, nu), r);
    CHECK(testutil::rel_err(fast, slow) <= 1e-9);
  }
}

TEST_CASE("property: paths through a neuron factor into before and after parts") {
  std::mt19937_64 rng(29);
  int checked = 0;
  for (std::uint64_t t = 0; t < 120 && checked < 60; ++t) {
    const Network net = random_net(rng, 300 + t, 3);
    const auto all = enumerate_all_paths(net);
    if (all.size() > 200) continue;
    ++checked;
    for (NeuronIndex nu : net.hidden()) {
      std::map<std::vector<NeuronIndex>, double> through;
      for (const auto& p : all)
        if (net.kind(p.nodes.front()) == NeuronKind::Input &&
            std::find(p.nodes.begin(), p.nodes.end(), nu) != p.nodes.end())
          through[p.nodes] = p.phi;
      const auto before = paths_into(net, nu);
      const auto after = enumerate_paths(net, nu).paths;
      CHECK(through.size() == before.size() * after.size());
      for (const auto& b : before)
        for (const auto& a : after) {
          std::vector<NeuronIndex> joined = b.nodes;
          joined.insert(joined.end(), a.nodes.begin() + 1, a.nodes.end());
          const auto it = through.find(joined);
          REQUIRE(it != through.end());
          CHECK(testutil::rel_err(it->second, b.weight * a.weight) <= 1e-12);
        }
    }
  }
  CHECK(checked >= 30);
}

TEST_CASE("property: inner product is linear in the outgoing weights") {
  std::mt19937_64 rng(31);
  for (std::uint64_t t = 0; t < 50; ++t) {
    const Network net = random_net(rng, 700 + t, 4);
    const NeuronIndex nu = net.hidden()[t % net.hidden_count()];
    const Subgraph s = subgraph_after(net, nu);
    std::vector<std::uint8_t> bits(s.gated.size());
    for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1u);
    const double base = inner_product_fast(net, s, with_bits(s, bits));
    for (double lambda : {0.5, 3.0, -2.0}) {
      const Network scaled = scale_outgoing(net, nu, lambda);
      const Subgraph ss = subgraph_after(scaled, nu);
      CHECK(testutil::rel_err(inner_product_fast(scaled, ss, with_bits(ss, bits)), lambda * base) <= 1e-12);
    }
  }
}
