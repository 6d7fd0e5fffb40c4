#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "pfscale/netmodel/network.hpp"

namespace pfscale::net {

// JSON network files. Top-level keys: buses, branches, loads, source,
// radial. Complex numbers are [re, im] pairs. The schema is shipped as
// schemas/network.schema.json.

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& doc);

/// Compact, deterministic serialization (equal networks give equal bytes).
std::string serialize_network(const Network& net);
Network parse_network(const std::string& text);

void save_network(const Network& net, const std::filesystem::path& path);
Network load_network(const std::filesystem::path& path);

}  // namespace pfscale::net
