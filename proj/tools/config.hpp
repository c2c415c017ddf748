#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ramsey/affine_model.hpp"
#include "ramsey/mc.hpp"
#include "ramsey/mixture.hpp"

namespace ramsey::cli {

// Configuration problems exit with code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json load_json_file(const std::string& path);

// Model spec from a config document; throws ConfigError on parse or validation
// failure (the validation report is included in the message).
AffineModelSpec load_model(const nlohmann::json& j);

// {"n_paths", "step", "horizon", "seed", "antithetic"} with defaults filled in.
SimConfig sim_from_json(const nlohmann::json& j);
nlohmann::json sim_to_json(const SimConfig& sim);

// Mixture settings on top of a base model. Either generated
//   {"nodes", "theta_min", "theta_max", "rate_f", "rate_g",
//    "portfolio": "merton" | "shared",
//    "premium_perp": {"mode": "shared"}
//                  | {"mode": "scaled", "coordinate": i, "value": v,
//                     "profile": "one_minus_theta" | "inverse_theta"}}
// or with explicit per-node arrays "portfolio_loading_theta" / "premium_perp_theta"
// which take precedence.
MixtureSpec mixture_from_json(const AffineModelSpec& base, const nlohmann::json& j);

std::vector<double> parse_double_list(const std::string& csv);

// FNV-1a 64 hash (hex) of a canonical json dump.
std::string json_hash(const nlohmann::json& j);

} // namespace ramsey::cli
