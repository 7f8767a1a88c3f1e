#pragma once

#include "pinlab/io.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pinlab::runner {

using io::Json;

extern const std::vector<std::string> kCommands;

struct ExperimentConfig {
    std::string command;
    Json params = Json::object();
    std::string output;
};

// Validates the top-level shape ({command, params, output}) and the params
// of the command: unknown keys, missing required keys and wrong types raise
// ConfigError naming the key. `cli_command` (if non-empty) must agree with
// the file's command.
ExperimentConfig parse_config(const Json& j, const std::string& cli_command = "");
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& cli_command = "");

struct Overrides {
    std::optional<std::string> out;
    std::optional<unsigned> threads;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> cache_dir; // PINLAB_CACHE
};

struct OutputFile {
    std::string name;
    std::string sha256;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    Json config;
    std::string tool_version;
    double wall_time = 0.0;
    std::uint64_t memory_hits = 0, disk_hits = 0, builds = 0;
    std::string cache_dir;
    unsigned threads = 1;
    std::vector<OutputFile> files;

    Json to_json() const;
};

// Runs the command and writes its result files, then manifest.json.
RunManifest run(const ExperimentConfig& cfg, const Overrides& ov = {});

// Recomputes every digest listed in <dir>/manifest.json.
bool verify_manifest(const std::filesystem::path& dir);

} // namespace pinlab::runner
