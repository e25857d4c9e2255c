#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

#include "flatmpc/synth.hpp"

namespace flatmpc {

// The three per-axis controllers shipped as one versioned document.
struct ControllerBundle {
  std::array<AxisController, 3> axes;
};

uint64_t fnv1a64(std::string_view data);

// Compact JSON with a checksum over the document minus the checksum field.
// Identical bundles serialize to identical bytes.
std::string serialize_controller(const ControllerBundle& bundle);

// Throws "controller_corrupt" on parse/checksum/shape problems and
// "controller_version" on schema-version mismatch.
ControllerBundle deserialize_controller(const std::string& bytes);

void save_controller(const std::string& path, const ControllerBundle& bundle);
ControllerBundle load_controller(const std::string& path);

}  // namespace flatmpc
