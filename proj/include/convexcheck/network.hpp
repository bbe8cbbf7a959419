#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace convexcheck {

/// Position of a neuron inside a Network. Stable for the lifetime of the
/// network and equal to the neuron's position in its description.
using NeuronIndex = std::size_t;

enum class NeuronKind { Input, Hidden, Output };
enum class Activation { Linear, ReLU };

const char* to_string(NeuronKind kind);

struct NeuronSpec {
  std::string id;
  NeuronKind kind;
};

struct EdgeSpec {
  std::string src;
  std::string dst;
  double weight;
};

/// Plain, unvalidated description of a DAG ReLU network. A Network is built
/// from it; describe() gives it back.
struct NetworkDescription {
  std::vector<std::string> inputs;  // defines the coordinate order of x
  std::string output;
  std::vector<NeuronSpec> neurons;
  std::vector<EdgeSpec> edges;
  std::map<std::string, double> biases;  // missing hidden/output entries mean 0
};

struct Edge {
  NeuronIndex src;
  NeuronIndex dst;
  double weight;
};

/// Immutable DAG ReLU network with a single linear output neuron.
///
/// Hidden neurons use ReLU, input and output neurons are linear. The
/// constructor rejects cycles, duplicate edges, biases on inputs, and hidden
/// neurons that do not lie on an input-to-output path.
class Network {
 public:
  explicit Network(const NetworkDescription& desc);

  std::size_t input_dim() const { return inputs_.size(); }
  std::size_t neuron_count() const { return ids_.size(); }
  std::size_t hidden_count() const { return hidden_.size(); }

  const std::string& id(NeuronIndex n) const { return ids_.at(n); }
  NeuronKind kind(NeuronIndex n) const { return kinds_.at(n); }
  Activation activation(NeuronIndex n) const {
    return kinds_.at(n) == NeuronKind::Hidden ? Activation::ReLU : Activation::Linear;
  }
  double bias(NeuronIndex n) const { return biases_.at(n); }

  std::optional<NeuronIndex> find(std::string_view id) const;
  /// Throws StructureError for unknown ids.
  NeuronIndex index_of(std::string_view id) const;

  std::span<const NeuronIndex> inputs() const { return inputs_; }
  NeuronIndex output() const { return output_; }
  /// Hidden neurons in topological order. The position of a neuron in this
  /// list is its "hidden rank", the index used by ActivationPattern.
  std::span<const NeuronIndex> hidden() const { return hidden_; }
  bool is_hidden(NeuronIndex n) const { return kinds_.at(n) == NeuronKind::Hidden; }
  std::size_t hidden_rank(NeuronIndex n) const;
  std::span<const NeuronIndex> topo_order() const { return topo_; }

  std::span<const Edge> edges() const { return edges_; }
  /// Indices into edges() of the edges entering / leaving a neuron.
  std::span<const std::size_t> incoming(NeuronIndex n) const { return incoming_.at(n); }
  std::span<const std::size_t> outgoing(NeuronIndex n) const { return outgoing_.at(n); }

  NetworkDescription describe() const;

 private:
  std::vector<std::string> ids_;
  std::vector<NeuronKind> kinds_;
  std::vector<double> biases_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> incoming_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<NeuronIndex> inputs_;
  NeuronIndex output_ = 0;
  std::vector<NeuronIndex> hidden_;
  std::vector<std::size_t> hidden_rank_;
  std::vector<NeuronIndex> topo_;
};

/// Binary activations of the hidden neurons, indexed by hidden rank.
struct ActivationPattern {
  std::vector<std::uint8_t> bits;

  friend auto operator<=>(const ActivationPattern&, const ActivationPattern&) = default;
};

struct ActivationPatternHash {
  std::size_t operator()(const ActivationPattern& p) const noexcept;
};

/// "0101..." in hidden-rank order.
std::string to_string(const ActivationPattern& pattern);

/// x -> <slope, x> + offset
struct AffineForm {
  std::vector<double> slope;
  double offset = 0.0;

  double operator()(std::span<const double> x) const;
};

struct ForwardResult {
  double value = 0.0;
  std::vector<double> preacts;  // per neuron; inputs hold x itself
  ActivationPattern pattern;    // bit = 1 iff preact > 0
};

ForwardResult forward(const Network& net, std::span<const double> x);

/// Output value only; skips building the pattern.
double evaluate(const Network& net, std::span<const double> x);

/// Per-neuron affine forms of the pre-activations when every hidden ReLU is
/// frozen to the gate given by `pattern`. Entry output() is the affine piece
/// of f on any region carrying this pattern.
std::vector<AffineForm> linearize(const Network& net, const ActivationPattern& pattern);

/// Layered MLP shape: input dimension, hidden widths, input skip connections.
struct Architecture {
  std::size_t d = 1;
  std::vector<std::size_t> widths;
  bool skip = false;

  void validate() const;
};

/// The convex two-hidden-layer example that no ICNN of the same shape
/// implements: W1 = Id, b1 = 0, W2 = [[-1, 1], [2, 1]], b2 = (-1, -0.5),
/// w3 = (1, 1), b3 = 0.
Network build_counterexample();

/// Fully connected layered network with every weight and bias drawn i.i.d.
/// from N(0, 1). Draw order is layer by layer, neuron by neuron: incoming
/// layer weights, then input skip weights, then the bias.
Network sample_gaussian(const Architecture& arch, std::uint64_t seed);

/// Neuron ids used by the layered constructors: x1..xd, h<layer>_<j>, out.
std::string input_id(std::size_t i);
std::string hidden_id(std::size_t layer, std::size_t j);
inline constexpr std::string_view kOutputId = "out";

/// Longest-path depth from the inputs (inputs are layer 0).
std::vector<std::size_t> longest_path_layers(const Network& net);

/// True iff every weight on an edge leaving a hidden neuron is >= 0. Throws
/// StructureError when the DAG is not a layered (skip-)MLP.
bool is_icnn(const Network& net);

/// Same function: incoming weights and bias of `n` scaled by lambda > 0,
/// outgoing weights by 1 / lambda.
Network rescale_neuron(const Network& net, NeuronIndex n, double lambda);

/// Replaces every weight on an edge leaving a hidden neuron by its absolute
/// value, turning a layered network into an ICNN.
Network to_icnn(const Network& net);

}  // namespace convexcheck
