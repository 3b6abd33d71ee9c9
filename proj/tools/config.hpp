#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace flea::cli {

enum class ParamType { Real, Integer, RealList, Choice };

struct ParamSpec {
  ParamType type;
  std::variant<double, std::vector<double>, std::string> fallback;
  std::vector<std::string> choices;  // Choice only
  std::string help;
};

using Schema = std::map<std::string, ParamSpec>;
using Value = std::variant<double, std::vector<double>, std::string>;

const std::vector<std::string>& experiment_names();
const Schema& schema_for(const std::string& experiment);

/// Typed, fully resolved parameter set (defaults filled in).
class ParamMap {
 public:
  ParamMap() = default;
  ParamMap(std::string experiment, std::map<std::string, Value> values);

  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::vector<double> list(const std::string& key) const;
  const std::string& choice(const std::string& key) const;

  const std::map<std::string, Value>& values() const { return values_; }
  nlohmann::json to_json() const;

 private:
  const Value& at(const std::string& key) const;
  std::string experiment_;
  std::map<std::string, Value> values_;
};

struct ExperimentConfig {
  std::string experiment;
  ParamMap params;
  std::uint64_t seed = 1;
  std::filesystem::path output_dir = "out";
  std::size_t workers = 1;
};

// key = value lines; '#' starts a comment. A line "experiment = name" is allowed.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

// "key=value" override strings.
std::pair<std::string, std::string> split_assignment(const std::string& text);

/// Parses raw text values against the schema and fills defaults. Unknown keys
/// and malformed values raise ConfigError naming the key.
ParamMap resolve(const std::string& experiment, const std::map<std::string, std::string>& raw);
ParamMap resolve(const std::string& experiment, const nlohmann::json& params);

// Numeric list syntax: [a, b, ...], linspace(a, b, n), logspace(a, b, n), or a scalar.
std::vector<double> parse_list(const std::string& text);
double parse_real(const std::string& text);

}  // namespace flea::cli
