#include "manifest.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>

namespace ramsey::cli {

nlohmann::json manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["config_hash"] = m.config_hash;
    j["solver_step"] = m.solver_step;
    j["seed"] = m.seed;
    j["tool_version"] = m.tool_version;
    j["wall_time_s"] = m.wall_time_s;
    j["outputs"] = m.outputs;
    j["verdicts"] = m.verdicts;
    j["effective_config"] = m.effective_config;
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.solver_step = j.at("solver_step").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.wall_time_s = j.value("wall_time_s", 0.0);
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.verdicts = j.value("verdicts", nlohmann::json::object());
    m.effective_config = j.at("effective_config");
    return m;
}

void atomic_write_with(const std::string& path,
                       const std::function<void(const std::string&)>& writer) {
    const std::string tmp = path + ".tmp";
    writer(tmp);
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot move " + tmp + " to " + path + ": " + ec.message());
}

void atomic_write_text(const std::string& path, const std::string& content) {
    atomic_write_with(path, [&](const std::string& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out << content;
        if (!out.good()) throw std::runtime_error("short write to " + tmp);
    });
}

void atomic_write_json(const std::string& path, const nlohmann::json& j) {
    atomic_write_text(path, j.dump(2) + "\n");
}

} // namespace ramsey::cli
