#pragma once

#include <filesystem>
#include <iosfwd>

#include <json.hpp>

#include "convexcheck/network.hpp"

namespace convexcheck {

/// {"inputs":[id...], "output":id, "neurons":[{"id":..,"kind":"input|hidden|output"}...],
///  "edges":[{"src":..,"dst":..,"w":float}...], "biases":{id:float,...}}
/// Unknown fields are rejected. Doubles are written in shortest round-trip form.
nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);

void save(const Network& net, std::ostream& out);
Network load(std::istream& in);

void save_file(const Network& net, const std::filesystem::path& path);
Network load_file(const std::filesystem::path& path);

}  // namespace convexcheck
