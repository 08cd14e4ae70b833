#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "etsm/simulation.hpp"

namespace etsm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Keys: A, C, Q (row-major nested arrays), R, Gamma, Gamma_e (numbers),
/// optional a (default uniform), x0 (default zero), N (default 200),
/// seed (default 0). Errors name the offending key.
SimConfig parse_config(const nlohmann::json& doc);
SimConfig parse_config_text(const std::string& text);
SimConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const SimConfig& config);

/// Second-order example plant with a send-on-delta channel
/// (Gamma = 0.6, Gamma_e = 1e-4), uniform weights, x0 = 0, N = 200.
SimConfig reference_config();

}  // namespace etsm
