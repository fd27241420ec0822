#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace qc::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0";
inline constexpr int kSpecVersion = 1;

struct ConfigError : std::runtime_error {
    ConfigError(std::string path, const std::string& what) : std::runtime_error(path + ": " + what), path(std::move(path)) {}
    std::string path;
};

struct RunResult {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

json load_config(const std::string& path);
std::string config_hash_hex(const json& cfg);

// `task` may be empty when the config names it. Output files land in out_dir.
RunResult run(const std::string& task, const json& cfg, const std::string& out_dir, int threads = 0);

struct Recipe {
    std::string name;
    std::string task;
    std::string description;
    json config;
};
const std::vector<Recipe>& recipes();
const Recipe& find_recipe(const std::string& name);

std::vector<std::string> plot_figures();
std::string emit_plot_script(const std::string& figure, const std::vector<std::string>& csvs);

int main_entry(int argc, char** argv);

}  // namespace qc::cli
