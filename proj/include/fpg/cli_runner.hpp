#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

namespace fpg::cli {

/// Parse a config document, apply "key=value" overrides (values parsed as
/// JSON when possible, else kept as strings), and reject unknown keys
/// against the given allow-list.
nlohmann::json load_config(const std::string& config_path_or_inline,
                           const std::vector<std::string>& overrides,
                           const std::vector<std::string>& allowed_keys);

std::string config_hash(const nlohmann::json& cfg);

/// Subcommand drivers; each returns a process exit code.
int run_landscape(const nlohmann::json& cfg, std::ostream& log);
int run_train(const nlohmann::json& cfg, std::ostream& log);
int run_constants(const nlohmann::json& cfg, std::ostream& out);
int run_env(const nlohmann::json& cfg, std::ostream& out);

extern const std::vector<std::string> kLandscapeKeys;
extern const std::vector<std::string> kTrainKeys;
extern const std::vector<std::string> kConstantsKeys;
extern const std::vector<std::string> kEnvKeys;

}  // namespace fpg::cli
