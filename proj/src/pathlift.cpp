#include "convexcheck/pathlift.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "convexcheck/errors.hpp"

namespace convexcheck {

namespace {

std::vector<bool> sweep(const Network& net, NeuronIndex start, bool forward) {
  std::vector<bool> seen(net.neuron_count(), false);
  std::deque<NeuronIndex> queue{start};
  seen[start] = true;
  const auto edges = net.edges();
  while (!queue.empty()) {
    NeuronIndex u = queue.front();
    queue.pop_front();
    for (std::size_t e : forward ? net.outgoing(u) : net.incoming(u)) {
      NeuronIndex v = forward ? edges[e].dst : edges[e].src;
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

void check_domain(const Subgraph& sub, const ActivationRestriction& r) {
  if (r.root != sub.root || r.neurons != sub.gated || r.bits.size() != r.neurons.size())
    throw StructureError("activation restriction domain does not match the subgraph of its root");
}

}  // namespace

Subgraph subgraph_after(const Network& net, NeuronIndex root) {
  if (!net.is_hidden(root)) throw StructureError("subgraph root '" + net.id(root) + "' is not a hidden neuron");
  const auto down = sweep(net, root, true);
  const auto up = sweep(net, net.output(), false);
  Subgraph sub;
  sub.root = root;
  sub.member.assign(net.neuron_count(), false);
  for (NeuronIndex u : net.topo_order()) {
    if (!down[u] || !up[u]) continue;
    sub.member[u] = true;
    sub.nodes.push_back(u);
    if (u != root && net.is_hidden(u)) sub.gated.push_back(u);
  }
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (sub.member[edges[e].src] && sub.member[edges[e].dst]) sub.edges.push_back(e);
  return sub;
}

ActivationRestriction restrict_pattern(const Network& net, const Subgraph& sub, const ActivationPattern& pattern) {
  if (pattern.bits.size() != net.hidden_count()) throw DimensionError("activation pattern size mismatch");
  ActivationRestriction r;
  r.root = sub.root;
  r.neurons = sub.gated;
  r.bits.reserve(sub.gated.size());
  for (NeuronIndex n : sub.gated) r.bits.push_back(pattern.bits[net.hidden_rank(n)]);
  return r;
}

double inner_product_fast(const Network& net, const Subgraph& sub, const ActivationRestriction& restriction) {
  check_domain(sub, restriction);
  std::vector<double> gate(net.neuron_count(), 1.0);
  for (std::size_t i = 0; i < restriction.neurons.size(); ++i)
    gate[restriction.neurons[i]] = restriction.bits[i] ? 1.0 : 0.0;
  std::vector<double> value(net.neuron_count(), 0.0);
  value[sub.root] = 1.0;
  const auto edges = net.edges();
  for (NeuronIndex u : sub.nodes) {
    if (u == sub.root) continue;
    double z = 0.0;
    for (std::size_t e : net.incoming(u))
      if (sub.member[edges[e].src]) z += edges[e].weight * value[edges[e].src];
    value[u] = gate[u] * z;
  }
  return value[net.output()];
}

double inner_product_fast(const Network& net, NeuronIndex root, const ActivationRestriction& restriction) {
  return inner_product_fast(net, subgraph_after(net, root), restriction);
}

double count_paths(const Network& net, NeuronIndex root) {
  std::vector<double> to_out(net.neuron_count(), 0.0);
  to_out[net.output()] = 1.0;
  const auto topo = net.topo_order();
  const auto edges = net.edges();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    const NeuronIndex u = *it;
    if (u == net.output()) continue;
    double c = 0.0;
    for (std::size_t e : net.outgoing(u)) c += to_out[edges[e].dst];
    to_out[u] = c;
  }
  return to_out[root];
}

PathVector enumerate_paths(const Network& net, NeuronIndex root) {
  const double count = count_paths(net, root);
  if (count > kMaxPaths)
    throw GuardRailError("neuron '" + net.id(root) + "' has " + std::to_string(count) + " paths to the output");
  PathVector pv;
  pv.root = root;
  pv.paths.reserve(static_cast<std::size_t>(count));
  const auto edges = net.edges();
  std::vector<NeuronIndex> stack{root};
  // Depth-first walk; `weight` of the current prefix is carried along.
  auto walk = [&](auto&& self, NeuronIndex u, double weight) -> void {
    if (u == net.output()) {
      pv.paths.push_back({stack, weight});
      return;
    }
    for (std::size_t e : net.outgoing(u)) {
      stack.push_back(edges[e].dst);
      self(self, edges[e].dst, weight * edges[e].weight);
      stack.pop_back();
    }
  };
  walk(walk, root, 1.0);
  return pv;
}

double inner_product_explicit(const PathVector& pv, const ActivationRestriction& restriction) {
  if (restriction.root != pv.root) throw StructureError("restriction root does not match path vector root");
  std::size_t span = 0;
  for (const Path& p : pv.paths)
    for (NeuronIndex n : p.nodes) span = std::max(span, n + 1);
  std::vector<double> gate(span, 1.0);
  for (std::size_t k = 0; k < restriction.neurons.size(); ++k)
    if (restriction.neurons[k] < span) gate[restriction.neurons[k]] = restriction.bits[k] ? 1.0 : 0.0;
  double total = 0.0;
  for (const Path& p : pv.paths) {
    double a = 1.0;
    for (std::size_t i = 1; i < p.nodes.size(); ++i) a *= gate[p.nodes[i]];
    total += a * p.weight;
  }
  return total;
}

std::vector<LiftedPath> enumerate_all_paths(const Network& net) {
  double total = 0.0;
  for (std::size_t u = 0; u < net.neuron_count(); ++u) total += count_paths(net, u);
  if (total > kMaxPaths) throw GuardRailError("network has " + std::to_string(total) + " paths to the output");
  std::vector<LiftedPath> out;
  out.reserve(static_cast<std::size_t>(total));
  const auto edges = net.edges();
  std::vector<NeuronIndex> stack;
  auto walk = [&](auto&& self, NeuronIndex u, double phi) -> void {
    if (u == net.output()) {
      out.push_back({stack, phi});
      return;
    }
    for (std::size_t e : net.outgoing(u)) {
      stack.push_back(edges[e].dst);
      self(self, edges[e].dst, phi * edges[e].weight);
      stack.pop_back();
    }
  };
  for (NeuronIndex u : net.topo_order()) {
    stack.assign(1, u);
    const double start = net.kind(u) == NeuronKind::Input ? 1.0 : net.bias(u);
    walk(walk, u, start);
  }
  return out;
}

double path_activation_term(const Network& net, const LiftedPath& path, const ForwardResult& fwd,
                            std::span<const double> x) {
  for (NeuronIndex n : path.nodes)
    if (net.is_hidden(n) && !fwd.pattern.bits[net.hidden_rank(n)]) return 0.0;
  const NeuronIndex start = path.nodes.front();
  if (net.kind(start) == NeuronKind::Input) {
    for (std::size_t i = 0; i < net.input_dim(); ++i)
      if (net.inputs()[i] == start) return x[i];
  }
  return 1.0;
}

std::pair<double, double> full_pathlift_identity_check(const Network& net, std::span<const double> x) {
  const ForwardResult fwd = forward(net, x);
  double rhs = 0.0;
  for (const LiftedPath& p : enumerate_all_paths(net)) rhs += p.phi * path_activation_term(net, p, fwd, x);
  return {fwd.value, rhs};
}

}  // namespace convexcheck
