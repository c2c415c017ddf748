#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace ramsey::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance record written next to every command's outputs. The embedded effective
/// config is sufficient to re-run the command and reproduce every listed output file
/// byte for byte (Monte Carlo outputs included, via the recorded seed).
struct RunManifest {
    std::string command;
    std::string config_hash; // hash of the effective config
    double solver_step = 0.0;
    std::uint64_t seed = 0;
    std::string tool_version = kToolVersion;
    double wall_time_s = 0.0;
    std::vector<std::string> outputs; // file names relative to the output directory
    nlohmann::json verdicts = nlohmann::json::object();
    nlohmann::json effective_config = nlohmann::json::object();
};

nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

// Temp-file-and-rename so partially written outputs are never observed.
void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_json(const std::string& path, const nlohmann::json& j);

// Writes through a temp file in the same directory, then renames over `path`.
// The writer receives the temp path.
void atomic_write_with(const std::string& path, const std::function<void(const std::string&)>& writer);

} // namespace ramsey::cli
