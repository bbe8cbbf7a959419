#include "convexcheck/network_io.hpp"

#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "convexcheck/errors.hpp"

namespace convexcheck {

namespace {

using nlohmann::json;

void only_fields(const json& obj, std::initializer_list<const char*> allowed, const char* where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ParseError("unknown field '" + key + "' in " + where);
  for (const char* key : allowed)
    if (!obj.contains(key)) throw ParseError(std::string("missing field '") + key + "' in " + where);
}

std::string get_string(const json& j, const char* where) {
  if (!j.is_string()) throw ParseError(std::string(where) + " must be a string id");
  return j.get<std::string>();
}

double get_number(const json& j, const char* where) {
  if (!j.is_number()) throw ParseError(std::string(where) + " must be a number");
  return j.get<double>();
}

NeuronKind parse_kind(const std::string& s) {
  if (s == "input") return NeuronKind::Input;
  if (s == "hidden") return NeuronKind::Hidden;
  if (s == "output") return NeuronKind::Output;
  throw ParseError("unknown neuron kind '" + s + "'");
}

}  // namespace

json to_json(const Network& net) {
  const NetworkDescription d = net.describe();
  json j;
  j["inputs"] = d.inputs;
  j["output"] = d.output;
  j["neurons"] = json::array();
  for (const auto& n : d.neurons) j["neurons"].push_back({{"id", n.id}, {"kind", to_string(n.kind)}});
  j["edges"] = json::array();
  for (const auto& e : d.edges) j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"w", e.weight}});
  j["biases"] = json::object();
  for (const auto& [id, b] : d.biases) j["biases"][id] = b;
  return j;
}

Network network_from_json(const json& j) {
  only_fields(j, {"inputs", "output", "neurons", "edges", "biases"}, "network");
  NetworkDescription d;
  if (!j["inputs"].is_array()) throw ParseError("'inputs' must be an array");
  for (const auto& id : j["inputs"]) d.inputs.push_back(get_string(id, "inputs entry"));
  d.output = get_string(j["output"], "output");
  if (!j["neurons"].is_array()) throw ParseError("'neurons' must be an array");
  for (const auto& n : j["neurons"]) {
    only_fields(n, {"id", "kind"}, "neuron");
    d.neurons.push_back({get_string(n["id"], "neuron id"), parse_kind(get_string(n["kind"], "neuron kind"))});
  }
  if (!j["edges"].is_array()) throw ParseError("'edges' must be an array");
  for (const auto& e : j["edges"]) {
    only_fields(e, {"src", "dst", "w"}, "edge");
    d.edges.push_back({get_string(e["src"], "edge src"), get_string(e["dst"], "edge dst"), get_number(e["w"], "edge w")});
  }
  if (!j["biases"].is_object()) throw ParseError("'biases' must be an object");
  for (const auto& [id, b] : j["biases"].items()) d.biases[id] = get_number(b, "bias");
  return Network(d);
}

void save(const Network& net, std::ostream& out) { out << to_json(net).dump(2) << '\n'; }

Network load(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return network_from_json(j);
}

void save_file(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  save(net, out);
}

Network load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return load(in);
}

}  // namespace convexcheck
