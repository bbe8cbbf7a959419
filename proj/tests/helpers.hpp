#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "convexcheck/network.hpp"
#include "convexcheck/rng.hpp"

namespace testutil {

using namespace convexcheck;

inline NetworkDescription layered(std::size_t d, const std::vector<std::vector<std::vector<double>>>& W,
                                  const std::vector<std::vector<double>>& b) {
  // W[l][j][i]: weight from neuron i of layer l to neuron j of layer l+1;
  // layer 0 holds the inputs, the last layer the single output.
  NetworkDescription desc;
  std::vector<std::vector<std::string>> names(W.size() + 1);
  for (std::size_t i = 0; i < d; ++i) {
    desc.inputs.push_back(input_id(i));
    desc.neurons.push_back({input_id(i), NeuronKind::Input});
    names[0].push_back(input_id(i));
  }
  for (std::size_t l = 0; l < W.size(); ++l) {
    const bool last = l + 1 == W.size();
    for (std::size_t j = 0; j < W[l].size(); ++j) {
      const std::string id = last ? std::string(kOutputId) : hidden_id(l + 1, j);
      desc.neurons.push_back({id, last ? NeuronKind::Output : NeuronKind::Hidden});
      names[l + 1].push_back(id);
      desc.biases[id] = b[l][j];
      for (std::size_t i = 0; i < W[l][j].size(); ++i) desc.edges.push_back({names[l][i], id, W[l][j][i]});
    }
  }
  desc.output = std::string(kOutputId);
  return desc;
}

/// Random DAG with `hidden` ReLU neurons: every hidden neuron gets an edge
/// from some earlier neuron and to some later one (or the output), so none
/// is dead. Extra edges appear with probability `density`.
inline Network random_dag(std::uint64_t seed, std::size_t d, std::size_t hidden, double density = 0.4,
                          bool biases = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif;
  NetworkDescription desc;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < d; ++i) {
    desc.inputs.push_back(input_id(i));
    desc.neurons.push_back({input_id(i), NeuronKind::Input});
    ids.push_back(input_id(i));
  }
  for (std::size_t h = 0; h < hidden; ++h) {
    const std::string id = "n" + std::to_string(h);
    desc.neurons.push_back({id, NeuronKind::Hidden});
    ids.push_back(id);
  }
  desc.neurons.push_back({"out", NeuronKind::Output});
  ids.push_back("out");
  desc.output = "out";
  const std::size_t n = ids.size();
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (std::size_t v = d; v < n; ++v)
    for (std::size_t u = 0; u < v; ++u)
      if (unif(rng) < density) has[u][v] = true;
  for (std::size_t v = d; v + 1 < n; ++v) {
    bool in = false, out = false;
    for (std::size_t u = 0; u < v; ++u) in = in || has[u][v];
    for (std::size_t w = v + 1; w < n; ++w) out = out || has[v][w];
    if (!in) has[std::uniform_int_distribution<std::size_t>(0, v - 1)(rng)][v] = true;
    if (!out) has[v][std::uniform_int_distribution<std::size_t>(v + 1, n - 1)(rng)] = true;
  }
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t v = 0; v < n; ++v)
      if (has[u][v]) desc.edges.push_back({ids[u], ids[v], gauss(rng)});
  if (biases)
    for (std::size_t v = d; v < n; ++v) desc.biases[ids[v]] = gauss(rng);
  return Network(desc);
}

inline std::vector<double> random_point(std::mt19937_64& rng, std::size_t d, double r = 3.0) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> x(d);
  for (auto& v : x) v = u(rng);
  return x;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b))); }

/// Counterexample with the last layer (weights from nu1, nu2) replaced.
inline Network counterexample_with_w3(double w31, double w32) {
  NetworkDescription desc = build_counterexample().describe();
  for (auto& e : desc.edges) {
    if (e.dst != desc.output) continue;
    if (e.src == "nu1") e.weight = w31;
    if (e.src == "nu2") e.weight = w32;
  }
  return Network(desc);
}

}  // namespace testutil
