#pragma once

#include <string>

#include "fzsl/fedcore.hpp"

namespace fzsl {

// Flat `key = value` config files with keys mirroring FedConfig fields.
// Unknown keys are hard errors so sweep typos cannot pass silently.
FedConfig parse_config_text(const std::string& body,
                            const std::string& path_for_errors);
FedConfig load_config_file(const std::string& path);

// Canonical serialization: fixed key order, shortest round-trip floats.
std::string serialize_config(const FedConfig& config);

uint64_t config_digest(const FedConfig& config);

}  // namespace fzsl
