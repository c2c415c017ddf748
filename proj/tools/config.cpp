#include "config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ramsey::cli {

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

AffineModelSpec load_model(const nlohmann::json& j) {
    AffineModelSpec spec;
    try {
        spec = spec_from_json(j);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("model config: ") + e.what());
    }
    const auto report = validate_spec(spec);
    if (!report.pass()) throw ConfigError("model spec invalid:\n" + report.to_string());
    return spec;
}

SimConfig sim_from_json(const nlohmann::json& j) {
    SimConfig sim;
    sim.n_paths = j.value("n_paths", std::int64_t{4096});
    sim.step = j.value("step", 0.01);
    sim.horizon = j.value("horizon", 1.0);
    sim.seed = j.value("seed", std::uint64_t{42});
    sim.antithetic = j.value("antithetic", false);
    const std::string scheme = j.value("scheme", "euler_full_truncation");
    if (scheme != "euler_full_truncation")
        throw ConfigError("unknown scheme: " + scheme);
    try {
        sim.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    return sim;
}

nlohmann::json sim_to_json(const SimConfig& sim) {
    return {{"n_paths", sim.n_paths},
            {"step", sim.step},
            {"horizon", sim.horizon},
            {"seed", sim.seed},
            {"antithetic", sim.antithetic},
            {"scheme", "euler_full_truncation"}};
}

namespace {

Eigen::VectorXd vec_from(const nlohmann::json& arr) {
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<int>(i)] = arr[i].get<double>();
    return v;
}

} // namespace

MixtureSpec mixture_from_json(const AffineModelSpec& base, const nlohmann::json& j) {
    MixtureSpec mix;
    try {
        mix = make_mixture_spec(base, j.value("nodes", 16), j.value("theta_min", 0.05),
                                j.value("theta_max", 0.95), j.value("rate_f", 1.0),
                                j.value("rate_g", 1.0));
        const std::string portfolio = j.value("portfolio", "merton");
        if (portfolio == "shared") {
            for (auto& w : mix.portfolio_loading_theta) w = base.portfolio_loading;
        } else if (portfolio != "merton") {
            throw ConfigError("unknown portfolio family: " + portfolio);
        }
        if (j.contains("premium_perp")) {
            const auto& pp = j.at("premium_perp");
            const std::string mode = pp.value("mode", "shared");
            if (mode == "scaled") {
                const int coord = pp.at("coordinate").get<int>();
                const double value = pp.at("value").get<double>();
                const std::string profile = pp.value("profile", "one_minus_theta");
                if (coord < 1 || coord > base.dim)
                    throw ConfigError("premium_perp coordinate out of range");
                for (int k = 0; k < mix.n_nodes(); ++k) {
                    const double theta = mix.theta_nodes[static_cast<std::size_t>(k)];
                    double scale;
                    if (profile == "one_minus_theta")
                        scale = 1.0 - theta;
                    else if (profile == "inverse_theta")
                        scale = 1.0 / theta;
                    else
                        throw ConfigError("unknown premium_perp profile: " + profile);
                    Eigen::VectorXd v = Eigen::VectorXd::Zero(base.dim);
                    v[coord - 1] = value * scale;
                    mix.premium_perp_theta[static_cast<std::size_t>(k)] = v;
                }
            } else if (mode != "shared") {
                throw ConfigError("unknown premium_perp mode: " + mode);
            }
        }
        if (j.contains("portfolio_loading_theta")) {
            const auto& rows = j.at("portfolio_loading_theta");
            if (rows.size() != static_cast<std::size_t>(mix.n_nodes()))
                throw ConfigError("portfolio_loading_theta must have one row per node");
            for (std::size_t k = 0; k < rows.size(); ++k)
                mix.portfolio_loading_theta[k] = vec_from(rows[k]);
        }
        if (j.contains("premium_perp_theta")) {
            const auto& rows = j.at("premium_perp_theta");
            if (rows.size() != static_cast<std::size_t>(mix.n_nodes()))
                throw ConfigError("premium_perp_theta must have one row per node");
            for (std::size_t k = 0; k < rows.size(); ++k)
                mix.premium_perp_theta[k] = vec_from(rows[k]);
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("mixture config: ") + e.what());
    }
    const auto report = validate_mixture(mix);
    if (!report.pass()) throw ConfigError("mixture spec invalid:\n" + report.to_string());
    return mix;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse number: " + item);
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

std::string json_hash(const nlohmann::json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace ramsey::cli
