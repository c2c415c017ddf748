#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace ramsey::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBlowup = 3;
inline constexpr int kExitVerification = 4;

// Executes the command described by an effective config document into out_dir and
// writes the outputs plus a RunManifest atomically. Returns kExitOk or
// kExitVerification; configuration and blowup failures surface as ConfigError and
// RiccatiBlowupError for the caller to map to exit codes.
int run_effective(const nlohmann::json& effective, const std::string& out_dir);

// Re-runs the effective config embedded in a manifest; outputs are byte-identical to
// the original run.
int run_replay(const std::string& manifest_path, const std::string& out_dir);

} // namespace ramsey::cli
