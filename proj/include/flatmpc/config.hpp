#pragma once

#include <string>

#include "flatmpc/sim.hpp"

namespace flatmpc {

// Strict JSON config loading: unknown keys anywhere in the document are
// rejected, all fields carry defaults matching the stock scenario. Throws
// "bad_config" with the offending key or value in the message.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& text);

}  // namespace flatmpc
