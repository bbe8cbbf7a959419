#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "convexcheck/errors.hpp"
#include "convexcheck/network.hpp"
#include "convexcheck/network_io.hpp"
#include "helpers.hpp"

using namespace convexcheck;

namespace {

double preact(const Network& net, const ForwardResult& fr, const char* id) { return fr.preacts[net.index_of(id)]; }

NetworkDescription single_relu(double w1, double b1, double w2, double b2 = 0.0) {
  return testutil::layered(1, {{{w1}}, {{w2}}}, {{b1}, {b2}});
}

}  // namespace

TEST_CASE("forward on the counterexample") {
  const Network net = build_counterexample();
  const std::vector<double> origin{0.0, 0.0};
  const auto f0 = forward(net, origin);
  CHECK(f0.value == 0.0);
  CHECK(preact(net, f0, "nu1") == -1.0);
  CHECK(preact(net, f0, "nu2") == -0.5);

  const std::vector<double> x02{0.0, 2.0};
  const auto f1 = forward(net, x02);
  CHECK(f1.value == doctest::Approx(2.5));
  CHECK(preact(net, f1, "nu1") == doctest::Approx(1.0));
  CHECK(preact(net, f1, "nu2") == doctest::Approx(1.5));

  const std::vector<double> x11{1.0, 1.0};
  const auto f2 = forward(net, x11);
  CHECK(f2.value == doctest::Approx(2.5));
  CHECK(preact(net, f2, "nu1") == doctest::Approx(-1.0));
  CHECK(preact(net, f2, "nu2") == doctest::Approx(2.5));
  CHECK(to_string(f2.pattern) == "1101");

  const auto again = forward(net, x11);
  CHECK(again.value == f2.value);
  CHECK(again.preacts == f2.preacts);
}

TEST_CASE("counterexample structure") {
  const Network net = build_counterexample();
  CHECK(net.hidden_count() == 4);
  CHECK(net.input_dim() == 2);
  CHECK(net.kind(net.output()) == NeuronKind::Output);
  CHECK(net.activation(net.output()) == Activation::Linear);
  CHECK_FALSE(is_icnn(net));
  CHECK(longest_path_layers(net)[net.output()] == 3);
}

TEST_CASE("activation is zero exactly on the hyperplane") {
  const Network net(single_relu(1.0, 0.0, 1.0));
  const std::vector<double> zero{0.0};
  CHECK(forward(net, zero).pattern.bits == std::vector<std::uint8_t>{0});
}

TEST_CASE("forward rejects a dimension mismatch") {
  const Network net = build_counterexample();
  const std::vector<double> x{1.0};
  CHECK_THROWS_AS(forward(net, x), DimensionError);
}

TEST_CASE("linearize") {
  const Network net = build_counterexample();
  SUBCASE("all gates closed gives the output bias") {
    const auto forms = linearize(net, ActivationPattern{{0, 0, 0, 0}});
    const auto& f = forms[net.output()];
    CHECK(f.slope == std::vector<double>{0.0, 0.0});
    CHECK(f.offset == 0.0);
    const Network biased(single_relu(1.0, 0.3, 2.0, -0.7));
    CHECK(linearize(biased, ActivationPattern{{0}})[biased.output()].offset == -0.7);
  }
  SUBCASE("all gates open") {
    const auto forms = linearize(net, ActivationPattern{{1, 1, 1, 1}});
    const auto& f = forms[net.output()];
    CHECK(f.slope[0] == doctest::Approx(1.0));
    CHECK(f.slope[1] == doctest::Approx(2.0));
    CHECK(f.offset == doctest::Approx(-1.5));
  }
  SUBCASE("pattern size is checked") { CHECK_THROWS_AS(linearize(net, ActivationPattern{{1, 1}}), DimensionError); }
}

TEST_CASE("sample_gaussian") {
  const Architecture arch{2, {2, 2}, false};
  const Network a = sample_gaussian(arch, 42);
  const Network b = sample_gaussian(arch, 42);
  const Network c = sample_gaussian(arch, 43);
  REQUIRE(a.edges().size() == 10);
  std::size_t biases = 0;
  for (NeuronIndex n = 0; n < a.neuron_count(); ++n)
    if (a.kind(n) != NeuronKind::Input) ++biases;
  CHECK(biases == 5);
  bool differs = false;
  for (std::size_t e = 0; e < a.edges().size(); ++e) {
    CHECK(a.edges()[e].weight == b.edges()[e].weight);
    differs = differs || a.edges()[e].weight != c.edges()[e].weight;
  }
  CHECK(differs);

  SUBCASE("skip connections add input edges to deeper layers") {
    const Network s = sample_gaussian(Architecture{2, {2, 2}, true}, 1);
    CHECK(s.edges().size() == 10 + 2 * 2 + 2);
  }

  SUBCASE("first weight has mean zero") {
    const int N = 10000;
    double sum = 0.0;
    for (int i = 0; i < N; ++i) sum += sample_gaussian(arch, static_cast<std::uint64_t>(i)).edges()[0].weight;
    CHECK(std::abs(sum / N) < 4.0 / std::sqrt(double(N)));
  }
}

TEST_CASE("is_icnn") {
  const Network pos(testutil::layered(2, {{{1, 2}, {3, 4}}, {{1, 1}, {2, 0.5}}, {{1, 1}}}, {{0, 0}, {-1, 0}, {0}}));
  CHECK(is_icnn(pos));
  const Network neg_first(
      testutil::layered(2, {{{-1, 2}, {3, -4}}, {{1, 1}, {2, 0.5}}, {{1, 1}}}, {{0, 0}, {-1, 0}, {0}}));
  CHECK(is_icnn(neg_first));
  const Network neg_hidden(
      testutil::layered(2, {{{1, 2}, {3, 4}}, {{1, -1}, {2, 0.5}}, {{1, 1}}}, {{0, 0}, {-1, 0}, {0}}));
  CHECK_FALSE(is_icnn(neg_hidden));
  CHECK(is_icnn(to_icnn(build_counterexample())));
  CHECK(is_icnn(to_icnn(sample_gaussian(Architecture{2, {3, 3}, true}, 5))));

  SUBCASE("non-layered DAG is a structural error") {
    NetworkDescription d = testutil::layered(1, {{{1}}, {{1}}, {{1}}}, {{0}, {0}, {0}});
    d.edges.push_back({"h1_1", "out", 1.0});  // hidden skip over a layer
    CHECK_THROWS_AS(is_icnn(Network(d)), StructureError);
  }
}

TEST_CASE("JSON round trip") {
  const Network net = build_counterexample();
  std::stringstream ss;
  save(net, ss);
  const Network back = load(ss);
  REQUIRE(back.neuron_count() == net.neuron_count());
  for (NeuronIndex n = 0; n < net.neuron_count(); ++n) {
    CHECK(back.id(n) == net.id(n));
    CHECK(back.kind(n) == net.kind(n));
    CHECK(back.bias(n) == net.bias(n));
  }
  REQUIRE(back.edges().size() == net.edges().size());
  for (std::size_t e = 0; e < net.edges().size(); ++e) {
    CHECK(back.edges()[e].src == net.edges()[e].src);
    CHECK(back.edges()[e].dst == net.edges()[e].dst);
    CHECK(back.edges()[e].weight == net.edges()[e].weight);
  }

  SUBCASE("doubles survive exactly") {
    const Network g = sample_gaussian(Architecture{3, {4, 2}, true}, 99);
    std::stringstream s2;
    save(g, s2);
    const Network h = load(s2);
    for (std::size_t e = 0; e < g.edges().size(); ++e) CHECK(h.edges()[e].weight == g.edges()[e].weight);
    for (NeuronIndex n = 0; n < g.neuron_count(); ++n) CHECK(h.bias(n) == g.bias(n));
  }
}

TEST_CASE("load rejects invalid networks") {
  auto load_str = [](const std::string& s) {
    std::istringstream in(s);
    return load(in);
  };
  const std::string head =
      R"({"inputs":["x1"],"output":"out","neurons":[{"id":"x1","kind":"input"},{"id":"a","kind":"hidden"},)"
      R"({"id":"b","kind":"hidden"},{"id":"out","kind":"output"}],)";
  SUBCASE("cycle") {
    CHECK_THROWS_AS(load_str(head + R"("edges":[{"src":"x1","dst":"a","w":1},{"src":"a","dst":"b","w":1},)"
                                    R"({"src":"b","dst":"a","w":1},{"src":"b","dst":"out","w":1}],"biases":{}})"),
                    CycleError);
  }
  SUBCASE("two outputs") {
    CHECK_THROWS_AS(
        load_str(R"({"inputs":["x1"],"output":"o1","neurons":[{"id":"x1","kind":"input"},)"
                 R"({"id":"o1","kind":"output"},{"id":"o2","kind":"output"}],)"
                 R"("edges":[{"src":"x1","dst":"o1","w":1},{"src":"x1","dst":"o2","w":1}],"biases":{}})"),
        StructureError);
  }
  SUBCASE("malformed JSON") { CHECK_THROWS_AS(load_str("{\"inputs\": ["), ParseError); }
  SUBCASE("unknown field") {
    CHECK_THROWS_AS(load_str(head + R"("edges":[{"src":"x1","dst":"a","w":1},{"src":"a","dst":"b","w":1},)"
                                    R"({"src":"b","dst":"out","w":1}],"biases":{},"extra":1})"),
                    ParseError);
  }
  SUBCASE("dead neuron") {
    CHECK_THROWS_AS(load_str(head + R"("edges":[{"src":"x1","dst":"a","w":1},{"src":"a","dst":"out","w":1},)"
                                    R"({"src":"x1","dst":"b","w":1}],"biases":{}})"),
                    StructureError);
  }
  SUBCASE("bias on an input") {
    CHECK_THROWS_AS(load_str(head + R"("edges":[{"src":"x1","dst":"a","w":1},{"src":"a","dst":"b","w":1},)"
                                    R"({"src":"b","dst":"out","w":1}],"biases":{"x1":1}})"),
                    StructureError);
  }
  SUBCASE("duplicate edge") {
    CHECK_THROWS_AS(load_str(head + R"("edges":[{"src":"x1","dst":"a","w":1},{"src":"x1","dst":"a","w":2},)"
                                    R"({"src":"a","dst":"b","w":1},{"src":"b","dst":"out","w":1}],"biases":{}})"),
                    StructureError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_file("/nonexistent/net.json"), IoError); }
}

TEST_CASE("property: rescaling a hidden neuron leaves f unchanged") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  for (int t = 0; t < 100; ++t) {
    const Network net = t % 2 ? sample_gaussian(Architecture{2, {3, 3}, t % 4 == 1}, static_cast<std::uint64_t>(t))
                              : testutil::random_dag(static_cast<std::uint64_t>(t), 2, 5);
    const NeuronIndex h = net.hidden()[static_cast<std::size_t>(t) % net.hidden_count()];
    const Network scaled = rescale_neuron(net, h, lam(rng));
    const auto x = testutil::random_point(rng, 2);
    const double a = evaluate(net, x), b = evaluate(scaled, x);
    CHECK(std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("property: linearize agrees with forward and with finite differences") {
  std::mt19937_64 rng(77);
  int checked = 0;
  for (int t = 0; t < 200; ++t) {
    const Network net = t % 2 ? sample_gaussian(Architecture{3, {4, 3}, t % 3 == 0}, static_cast<std::uint64_t>(t))
                              : testutil::random_dag(static_cast<std::uint64_t>(t), 3, 6);
    const auto x = testutil::random_point(rng, 3);
    const auto fr = forward(net, x);
    bool clear = true;
    for (NeuronIndex h : net.hidden()) clear = clear && std::abs(fr.preacts[h]) > 1e-6;
    if (!clear) continue;
    ++checked;
    const auto forms = linearize(net, fr.pattern);
    const AffineForm& f = forms[net.output()];
    CHECK(std::abs(f(x) - fr.value) <= 1e-9 * std::max(1.0, std::abs(fr.value)));
    for (std::size_t i = 0; i < 3; ++i) {
      auto xp = x, xm = x;
      xp[i] += 1e-5;
      xm[i] -= 1e-5;
      // Only meaningful when the step stays inside the region.
      if (forward(net, xp).pattern != fr.pattern || forward(net, xm).pattern != fr.pattern) continue;
      const double fd = (evaluate(net, xp) - evaluate(net, xm)) / 2e-5;
      CHECK(std::abs(fd - f.slope[i]) <= 1e-4);
    }
  }
  CHECK(checked > 150);
}
