#pragma once

#include <string>

#include "json.hpp"

namespace roughkit::cli {

using Json = nlohmann::ordered_json;

/// Compact dump with every floating value written as a 17-significant-digit decimal
/// (non-finite values become null). Key order is insertion order.
std::string dump17(const Json& doc);

}  // namespace roughkit::cli
