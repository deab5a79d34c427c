#pragma once

#include <json.hpp>

#include <ostream>
#include <string>

namespace fsk::detail {

/// Two-space indentation; arrays and objects whose members are all scalars go on one line.
void print(std::ostream& out, const nlohmann::ordered_json& j, int indent);
std::string json_text(const nlohmann::ordered_json& j);

}  // namespace fsk::detail
