#pragma once

#include <json.hpp>
#include <string>

namespace cvx::jsonw {

using Json = nlohmann::ordered_json;

/// Serializes with every finite float printed via %.17g, so reports are
/// byte-stable across runs and platforms with the same arithmetic. Keys keep
/// insertion order; `indent` spaces per level (0 = compact).
std::string dump(const Json& value, int indent = 2);

void write_file(const Json& value, const std::string& path, int indent = 2);

}  // namespace cvx::jsonw
