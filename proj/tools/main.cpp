#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "config.hpp"
#include "flea/errors.hpp"
#include "runner.hpp"

namespace {

using namespace flea;
using namespace flea::cli;

struct Common {
  std::string config_file;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t workers = 1;
  std::vector<std::string> overrides;
};

ExperimentConfig assemble(const std::string& experiment, const Common& c, bool seed_given) {
  std::map<std::string, std::string> raw;
  ExperimentConfig cfg;
  cfg.experiment = experiment;
  cfg.seed = c.seed;
  if (!c.config_file.empty()) {
    raw = read_config_file(c.config_file);
    if (auto it = raw.find("experiment"); it != raw.end()) {
      if (it->second != experiment) {
        throw ConfigError("config file is for experiment '" + it->second + "', not '" + experiment + "'");
      }
      raw.erase(it);
    }
    if (auto it = raw.find("seed"); it != raw.end()) {
      if (!seed_given) cfg.seed = static_cast<std::uint64_t>(parse_real(it->second));
      raw.erase(it);
    }
  }
  for (const auto& o : c.overrides) {
    auto [k, v] = split_assignment(o);
    raw[k] = v;
  }
  cfg.params = resolve(experiment, raw);
  cfg.workers = c.workers;
  cfg.output_dir = c.out.empty() ? std::filesystem::path("out") / experiment : std::filesystem::path(c.out);
  return cfg;
}

void print_outputs(const nlohmann::json& m, const std::filesystem::path& dir) {
  for (const auto& o : m.at("outputs")) std::cout << (dir / o.at("file").get<std::string>()).string() << '\n';
  std::cout << (dir / "manifest.json").string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for localized perturbations of symmetric quantum systems"};
  app.set_version_flag("--version", tool_version());
  std::string replay_path;
  std::size_t replay_workers = 0;
  std::uint64_t replay_seed = 0;
  std::string replay_out;
  app.add_option("--replay", replay_path, "Re-run a manifest and byte-compare its CSV outputs");
  auto* rw = app.add_option("--workers", replay_workers, "Worker threads for --replay");
  auto* rs = app.add_option("--seed", replay_seed, "Seed override for --replay");
  app.add_option("--out", replay_out, "Output directory for --replay");
  app.require_subcommand(0, 1);

  Common common;
  std::map<std::string, CLI::App*> subs;
  std::map<std::string, CLI::Option*> seed_opts;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    sub->add_option("--config", common.config_file, "key = value config file")->check(CLI::ExistingFile);
    seed_opts[name] = sub->add_option("--seed", common.seed, "Random seed");
    sub->add_option("--out", common.out, "Output directory");
    sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("overrides", common.overrides, "key=value parameter overrides");
    std::string keys;
    for (const auto& [k, spec] : schema_for(name)) keys += "\n  " + k + (spec.help.empty() ? "" : ": " + spec.help);
    sub->footer("Parameters:" + keys);
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!replay_path.empty()) {
      if (!app.get_subcommands().empty()) throw ConfigError("--replay takes no subcommand");
      ReplayOptions opts;
      if (rw->count()) opts.workers = replay_workers;
      if (rs->count()) opts.seed = replay_seed;
      if (!replay_out.empty()) opts.output_dir = replay_out;
      const auto m = replay(replay_path, opts);
      std::cout << "replay identical: " << m.at("replay").at("of").get<std::string>() << '\n';
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cerr << app.help();
      return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    const auto cfg = assemble(name, common, seed_opts[name]->count() > 0);
    try {
      const auto m = run(cfg);
      print_outputs(m, cfg.output_dir);
    } catch (const std::exception& e) {
      if (dynamic_cast<const ConfigError*>(&e) == nullptr) {
        std::cerr << "failing parameters: " << cfg.params.to_json().dump() << " seed " << cfg.seed << '\n';
      }
      throw;
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "invalid parameter: " << e.what() << '\n';
    return 2;
  } catch (const ReplayMismatch& e) {
    std::cerr << e.what() << '\n';
    return 4;
  } catch (const ConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << " (iterations " << e.iterations() << ", residual "
              << e.worst_residual() << ")\n";
    return 3;
  } catch (const StabilityError& e) {
    std::cerr << "numerical failure: " << e.what() << " (t = " << e.time() << ", drift " << e.drift() << ")\n";
    return 3;
  } catch (const CoverageError& e) {
    std::cerr << "numerical failure: " << e.what() << " (captured " << e.captured() << ")\n";
    return 3;
  } catch (const ConstructionError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
