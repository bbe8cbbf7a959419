#include "convexcheck/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <set>
#include <unordered_map>
#include <utility>

#include "convexcheck/errors.hpp"

namespace convexcheck {

namespace {

constexpr std::size_t kNotHidden = std::numeric_limits<std::size_t>::max();

std::vector<bool> reach(std::size_t n, const std::vector<NeuronIndex>& starts,
                        const std::vector<std::vector<std::size_t>>& adj,
                        const std::vector<Edge>& edges, bool forward) {
  std::vector<bool> seen(n, false);
  std::deque<NeuronIndex> queue(starts.begin(), starts.end());
  for (NeuronIndex s : starts) seen[s] = true;
  while (!queue.empty()) {
    NeuronIndex u = queue.front();
    queue.pop_front();
    for (std::size_t e : adj[u]) {
      NeuronIndex v = forward ? edges[e].dst : edges[e].src;
      if (!seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

const char* to_string(NeuronKind kind) {
  switch (kind) {
    case NeuronKind::Input:
      return "input";
    case NeuronKind::Hidden:
      return "hidden";
    case NeuronKind::Output:
      return "output";
  }
  return "?";
}

Network::Network(const NetworkDescription& desc) {
  const std::size_t n = desc.neurons.size();
  std::unordered_map<std::string, NeuronIndex> by_id;
  ids_.reserve(n);
  kinds_.reserve(n);
  for (const auto& spec : desc.neurons) {
    if (spec.id.empty()) throw StructureError("neuron with empty id");
    if (!by_id.emplace(spec.id, ids_.size()).second)
      throw StructureError("duplicate neuron id '" + spec.id + "'");
    ids_.push_back(spec.id);
    kinds_.push_back(spec.kind);
  }
  auto lookup = [&](const std::string& id, const char* what) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw StructureError(std::string(what) + " refers to unknown neuron '" + id + "'");
    return it->second;
  };

  std::size_t output_count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (kinds_[i] == NeuronKind::Output) ++output_count;
  if (output_count != 1)
    throw StructureError("network must have exactly one output neuron, found " + std::to_string(output_count));
  output_ = lookup(desc.output, "output");
  if (kinds_[output_] != NeuronKind::Output) throw StructureError("'" + desc.output + "' is not an output neuron");

  std::set<NeuronIndex> input_set;
  for (const auto& id : desc.inputs) {
    NeuronIndex idx = lookup(id, "inputs");
    if (kinds_[idx] != NeuronKind::Input) throw StructureError("'" + id + "' listed as input but is not an input neuron");
    if (!input_set.insert(idx).second) throw StructureError("input '" + id + "' listed twice");
    inputs_.push_back(idx);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (kinds_[i] == NeuronKind::Input && !input_set.count(i))
      throw StructureError("input neuron '" + ids_[i] + "' missing from the input order");
  if (inputs_.empty()) throw StructureError("network has no input neuron");

  biases_.assign(n, 0.0);
  for (const auto& [id, b] : desc.biases) {
    NeuronIndex idx = lookup(id, "biases");
    if (kinds_[idx] == NeuronKind::Input) throw StructureError("input neuron '" + id + "' cannot carry a bias");
    if (!std::isfinite(b)) throw StructureError("non-finite bias on '" + id + "'");
    biases_[idx] = b;
  }

  incoming_.assign(n, {});
  outgoing_.assign(n, {});
  std::set<std::pair<NeuronIndex, NeuronIndex>> seen_edges;
  for (const auto& e : desc.edges) {
    NeuronIndex s = lookup(e.src, "edge src");
    NeuronIndex t = lookup(e.dst, "edge dst");
    if (s == t) throw CycleError("self loop on '" + e.src + "'");
    if (kinds_[t] == NeuronKind::Input) throw StructureError("edge into input neuron '" + e.dst + "'");
    if (kinds_[s] == NeuronKind::Output) throw StructureError("edge out of the output neuron");
    if (!std::isfinite(e.weight)) throw StructureError("non-finite weight on " + e.src + "->" + e.dst);
    if (!seen_edges.emplace(s, t).second) throw StructureError("duplicate edge " + e.src + "->" + e.dst);
    incoming_[t].push_back(edges_.size());
    outgoing_[s].push_back(edges_.size());
    edges_.push_back({s, t, e.weight});
  }

  // Kahn's algorithm; ties broken by description order so the cached order is
  // reproducible.
  std::vector<std::size_t> indeg(n, 0);
  for (const auto& e : edges_) ++indeg[e.dst];
  std::set<NeuronIndex> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.insert(i);
  while (!ready.empty()) {
    NeuronIndex u = *ready.begin();
    ready.erase(ready.begin());
    topo_.push_back(u);
    for (std::size_t e : outgoing_[u])
      if (--indeg[edges_[e].dst] == 0) ready.insert(edges_[e].dst);
  }
  if (topo_.size() != n) throw CycleError("edge relation contains a cycle");

  auto from_inputs = reach(n, inputs_, outgoing_, edges_, true);
  auto to_output = reach(n, {output_}, incoming_, edges_, false);
  hidden_rank_.assign(n, kNotHidden);
  for (NeuronIndex u : topo_) {
    if (kinds_[u] != NeuronKind::Hidden) continue;
    if (!from_inputs[u] || !to_output[u])
      throw StructureError("dead hidden neuron '" + ids_[u] + "' is not on any input-to-output path");
    hidden_rank_[u] = hidden_.size();
    hidden_.push_back(u);
  }
}

std::optional<NeuronIndex> Network::find(std::string_view id) const {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (ids_[i] == id) return i;
  return std::nullopt;
}

NeuronIndex Network::index_of(std::string_view id) const {
  if (auto idx = find(id)) return *idx;
  throw StructureError("unknown neuron '" + std::string(id) + "'");
}

std::size_t Network::hidden_rank(NeuronIndex n) const {
  std::size_t r = hidden_rank_.at(n);
  if (r == kNotHidden) throw StructureError("'" + ids_[n] + "' is not a hidden neuron");
  return r;
}

NetworkDescription Network::describe() const {
  NetworkDescription d;
  for (NeuronIndex i : inputs_) d.inputs.push_back(ids_[i]);
  d.output = ids_[output_];
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    d.neurons.push_back({ids_[i], kinds_[i]});
    if (kinds_[i] != NeuronKind::Input) d.biases[ids_[i]] = biases_[i];
  }
  for (const auto& e : edges_) d.edges.push_back({ids_[e.src], ids_[e.dst], e.weight});
  return d;
}

std::size_t ActivationPatternHash::operator()(const ActivationPattern& p) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (auto b : p.bits) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

std::string to_string(const ActivationPattern& pattern) {
  std::string s;
  s.reserve(pattern.bits.size());
  for (auto b : pattern.bits) s.push_back(b ? '1' : '0');
  return s;
}

double AffineForm::operator()(std::span<const double> x) const {
  double v = offset;
  for (std::size_t i = 0; i < slope.size(); ++i) v += slope[i] * x[i];
  return v;
}

ForwardResult forward(const Network& net, std::span<const double> x) {
  if (x.size() != net.input_dim())
    throw DimensionError("input has length " + std::to_string(x.size()) + ", network expects " +
                         std::to_string(net.input_dim()));
  ForwardResult r;
  r.preacts.assign(net.neuron_count(), 0.0);
  r.pattern.bits.assign(net.hidden_count(), 0);
  std::vector<double> post(net.neuron_count(), 0.0);
  for (std::size_t i = 0; i < net.input_dim(); ++i) {
    r.preacts[net.inputs()[i]] = x[i];
    post[net.inputs()[i]] = x[i];
  }
  const auto edges = net.edges();
  for (NeuronIndex u : net.topo_order()) {
    if (net.kind(u) == NeuronKind::Input) continue;
    double z = net.bias(u);
    for (std::size_t e : net.incoming(u)) z += edges[e].weight * post[edges[e].src];
    r.preacts[u] = z;
    if (net.is_hidden(u)) {
      const bool on = z > 0.0;
      r.pattern.bits[net.hidden_rank(u)] = on;
      post[u] = on ? z : 0.0;
    } else {
      post[u] = z;
    }
  }
  r.value = r.preacts[net.output()];
  return r;
}

double evaluate(const Network& net, std::span<const double> x) { return forward(net, x).value; }

std::vector<AffineForm> linearize(const Network& net, const ActivationPattern& pattern) {
  if (pattern.bits.size() != net.hidden_count())
    throw DimensionError("activation pattern covers " + std::to_string(pattern.bits.size()) +
                         " neurons, network has " + std::to_string(net.hidden_count()) + " hidden");
  const std::size_t d = net.input_dim();
  std::vector<AffineForm> forms(net.neuron_count(), AffineForm{std::vector<double>(d, 0.0), 0.0});
  std::vector<double> gate(net.neuron_count(), 1.0);
  for (std::size_t i = 0; i < d; ++i) forms[net.inputs()[i]].slope[i] = 1.0;
  for (NeuronIndex h : net.hidden()) gate[h] = pattern.bits[net.hidden_rank(h)] ? 1.0 : 0.0;
  const auto edges = net.edges();
  for (NeuronIndex u : net.topo_order()) {
    if (net.kind(u) == NeuronKind::Input) continue;
    AffineForm& f = forms[u];
    f.offset = net.bias(u);
    for (std::size_t e : net.incoming(u)) {
      const Edge& edge = edges[e];
      const double w = edge.weight * gate[edge.src];
      if (w == 0.0) continue;
      const AffineForm& g = forms[edge.src];
      for (std::size_t i = 0; i < d; ++i) f.slope[i] += w * g.slope[i];
      f.offset += w * g.offset;
    }
  }
  return forms;
}

void Architecture::validate() const {
  if (d < 1) throw StructureError("architecture needs d >= 1");
  for (auto w : widths)
    if (w < 1) throw StructureError("architecture widths must be >= 1");
}

std::string input_id(std::size_t i) { return "x" + std::to_string(i + 1); }
std::string hidden_id(std::size_t layer, std::size_t j) {
  return "h" + std::to_string(layer) + "_" + std::to_string(j + 1);
}

namespace {

// Builds a layered network; `next()` supplies weights and biases in the
// documented draw order.
template <class Next>
Network build_layered(const Architecture& arch, Next&& next) {
  arch.validate();
  NetworkDescription desc;
  std::vector<std::string> prev;
  for (std::size_t i = 0; i < arch.d; ++i) {
    desc.inputs.push_back(input_id(i));
    desc.neurons.push_back({input_id(i), NeuronKind::Input});
  }
  prev = desc.inputs;
  const std::size_t layers = arch.widths.size() + 1;
  for (std::size_t l = 1; l <= layers; ++l) {
    const bool last = l == layers;
    const std::size_t width = last ? 1 : arch.widths[l - 1];
    std::vector<std::string> cur;
    for (std::size_t j = 0; j < width; ++j) {
      std::string id = last ? std::string(kOutputId) : hidden_id(l, j);
      desc.neurons.push_back({id, last ? NeuronKind::Output : NeuronKind::Hidden});
      for (const auto& src : prev) desc.edges.push_back({src, id, next()});
      if (arch.skip && l >= 2)
        for (const auto& src : desc.inputs) desc.edges.push_back({src, id, next()});
      desc.biases[id] = next();
      cur.push_back(std::move(id));
    }
    prev = std::move(cur);
  }
  desc.output = std::string(kOutputId);
  return Network(desc);
}

}  // namespace

Network build_counterexample() {
  NetworkDescription desc;
  desc.inputs = {"x1", "x2"};
  desc.output = "out";
  desc.neurons = {{"x1", NeuronKind::Input},   {"x2", NeuronKind::Input},   {"mu1", NeuronKind::Hidden},
                  {"mu2", NeuronKind::Hidden}, {"nu1", NeuronKind::Hidden}, {"nu2", NeuronKind::Hidden},
                  {"out", NeuronKind::Output}};
  desc.edges = {
      {"x1", "mu1", 1.0},  {"x2", "mu1", 0.0},  {"x1", "mu2", 0.0},  {"x2", "mu2", 1.0},
      {"mu1", "nu1", -1.0}, {"mu2", "nu1", 1.0}, {"mu1", "nu2", 2.0}, {"mu2", "nu2", 1.0},
      {"nu1", "out", 1.0},  {"nu2", "out", 1.0},
  };
  desc.biases = {{"mu1", 0.0}, {"mu2", 0.0}, {"nu1", -1.0}, {"nu2", -0.5}, {"out", 0.0}};
  return Network(desc);
}

Network sample_gaussian(const Architecture& arch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  return build_layered(arch, [&] { return normal(rng); });
}

std::vector<std::size_t> longest_path_layers(const Network& net) {
  std::vector<std::size_t> layer(net.neuron_count(), 0);
  const auto edges = net.edges();
  for (NeuronIndex u : net.topo_order())
    for (std::size_t e : net.incoming(u)) layer[u] = std::max(layer[u], layer[edges[e].src] + 1);
  return layer;
}

bool is_icnn(const Network& net) {
  const auto layer = longest_path_layers(net);
  const auto edges = net.edges();
  bool nonneg = true;
  for (const Edge& e : edges) {
    if (net.kind(e.src) == NeuronKind::Input) continue;  // W1 and skip weights are unconstrained
    if (layer[e.dst] != layer[e.src] + 1)
      throw StructureError("not a layered network: edge " + net.id(e.src) + "->" + net.id(e.dst) +
                           " skips from layer " + std::to_string(layer[e.src]) + " to " +
                           std::to_string(layer[e.dst]));
    if (e.weight < 0.0) nonneg = false;
  }
  return nonneg;
}

Network rescale_neuron(const Network& net, NeuronIndex n, double lambda) {
  if (!net.is_hidden(n)) throw StructureError("can only rescale hidden neurons");
  if (!(lambda > 0.0)) throw StructureError("rescaling factor must be positive");
  NetworkDescription d = net.describe();
  const std::string& id = net.id(n);
  for (auto& e : d.edges) {
    if (e.dst == id) e.weight *= lambda;
    if (e.src == id) e.weight /= lambda;
  }
  d.biases[id] *= lambda;
  return Network(d);
}

Network to_icnn(const Network& net) {
  NetworkDescription d = net.describe();
  for (std::size_t i = 0; i < d.edges.size(); ++i)
    if (net.is_hidden(net.edges()[i].src)) d.edges[i].weight = std::abs(d.edges[i].weight);
  return Network(d);
}

}  // namespace convexcheck
