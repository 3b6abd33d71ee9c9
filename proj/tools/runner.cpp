#include "runner.hpp"

#include <chrono>
#include <fstream>

#include "flea/errors.hpp"
#include "output.hpp"

#ifndef FLEA_VERSION
#define FLEA_VERSION "0.0.0"
#endif

namespace flea::cli {

namespace fs = std::filesystem;

std::string tool_version() { return FLEA_VERSION; }

namespace {

bool is_csv(const std::string& name) { return name.size() > 4 && name.substr(name.size() - 4) == ".csv"; }

nlohmann::json build_manifest(const ExperimentConfig& config, const fs::path& dir,
                              const std::vector<std::string>& files, double wall) {
  nlohmann::json m;
  m["tool"] = "flea";
  m["version"] = tool_version();
  m["experiment"] = config.experiment;
  m["seed"] = config.seed;
  m["workers"] = config.workers;
  m["parameters"] = config.params.to_json();
  nlohmann::json echo = {{"experiment", config.experiment}, {"seed", config.seed}, {"parameters", m["parameters"]}};
  m["input_hashes"] = {{"config", hex64(fnv1a64(echo.dump()))}};
  m["wall_time_seconds"] = wall;
  nlohmann::json outs = nlohmann::json::array();
  for (const auto& f : files) {
    const std::string bytes = read_bytes(dir / f);
    outs.push_back({{"file", f},
                    {"kind", is_csv(f) ? "csv" : "svg"},
                    {"bytes", bytes.size()},
                    {"fnv1a64", hex64(fnv1a64(bytes))}});
  }
  m["outputs"] = outs;
  return m;
}

void write_manifest(const fs::path& dir, const nlohmann::json& m) {
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  if (!f) throw ConfigError("cannot write manifest in " + dir.string());
  f << m.dump(2) << '\n';
}

}  // namespace

nlohmann::json run(const ExperimentConfig& config) {
  if (config.workers < 1) throw ConfigError("workers must be at least 1");
  fs::create_directories(config.output_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const auto files = run_experiment(config, config.output_dir);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  auto m = build_manifest(config, config.output_dir, files, wall);
  write_manifest(config.output_dir, m);
  return m;
}

ExperimentConfig config_from_manifest(const nlohmann::json& manifest) {
  try {
    ExperimentConfig c;
    c.experiment = manifest.at("experiment").get<std::string>();
    c.seed = manifest.at("seed").get<std::uint64_t>();
    c.workers = manifest.value("workers", std::size_t{1});
    c.params = resolve(c.experiment, manifest.at("parameters"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
}

nlohmann::json replay(const fs::path& manifest_path, const ReplayOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot read manifest " + manifest_path.string());
  nlohmann::json original;
  try {
    in >> original;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (original.value("version", std::string{}) != tool_version()) {
    throw ConfigError("manifest was written by version " + original.value("version", std::string{"?"}) +
                      ", this is " + tool_version());
  }
  ExperimentConfig config = config_from_manifest(original);
  if (options.workers) config.workers = *options.workers;
  if (options.seed) config.seed = *options.seed;
  const fs::path source_dir = manifest_path.parent_path().empty() ? fs::path(".") : manifest_path.parent_path();
  config.output_dir = options.output_dir ? *options.output_dir : source_dir / "replay";
  if (fs::exists(config.output_dir) && fs::equivalent(config.output_dir, source_dir)) {
    throw ConfigError("replay output directory must differ from the recorded run");
  }

  nlohmann::json fresh = run(config);
  std::vector<std::string> differing;
  for (const auto& entry : original.at("outputs")) {
    if (entry.at("kind") != "csv") continue;
    const std::string name = entry.at("file");
    const fs::path old_file = source_dir / name;
    const std::string now = read_bytes(config.output_dir / name);
    bool same = false;
    if (fs::exists(old_file)) {
      same = fs::exists(config.output_dir / name) && read_bytes(old_file) == now;
    } else {
      same = hex64(fnv1a64(now)) == entry.at("fnv1a64").get<std::string>();
    }
    if (!same) differing.push_back(name);
  }
  fresh["replay"] = {{"of", manifest_path.string()},
                     {"status", differing.empty() ? "identical" : "diverged"},
                     {"differing", differing}};
  write_manifest(config.output_dir, fresh);
  if (!differing.empty()) {
    std::string list;
    for (const auto& f : differing) list += (list.empty() ? "" : ", ") + f;
    throw ReplayMismatch("replay diverged: " + list, differing);
  }
  return fresh;
}

}  // namespace flea::cli
