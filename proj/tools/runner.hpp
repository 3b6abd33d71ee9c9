#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace flea::cli {

std::string tool_version();

// Writes the experiment outputs and <output_dir>/manifest.json; returns the manifest.
nlohmann::json run(const ExperimentConfig& config);

// Rebuilds the config recorded in a manifest.
ExperimentConfig config_from_manifest(const nlohmann::json& manifest);

struct ReplayOptions {
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> output_dir;  // default: <manifest dir>/replay
};

/// Re-executes a manifest and byte-compares every CSV against the recorded
/// run. Throws ReplayMismatch listing the differing files.
nlohmann::json replay(const std::filesystem::path& manifest_path, const ReplayOptions& options = {});

// Experiment bodies; each returns the file names written into dir.
std::vector<std::string> run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir);

}  // namespace flea::cli
