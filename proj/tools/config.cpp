#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "flea/errors.hpp"

namespace flea::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

ParamSpec real(double v, std::string help) { return {ParamType::Real, v, {}, std::move(help)}; }
ParamSpec integer(long long v, std::string help) {
  return {ParamType::Integer, static_cast<double>(v), {}, std::move(help)};
}
ParamSpec list(std::vector<double> v, std::string help) { return {ParamType::RealList, std::move(v), {}, std::move(help)}; }
ParamSpec choice(std::vector<std::string> options, std::string help) {
  std::string first = options.front();
  return {ParamType::Choice, first, std::move(options), std::move(help)};
}

std::vector<double> logspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    v[i] = std::pow(10.0, a + (b - a) * t);
  }
  return v;
}

std::map<std::string, Schema> build_schemas() {
  std::map<std::string, Schema> s;
  const double inf = std::numeric_limits<double>::infinity();
  s["eigensolve"] = {
      {"potential", choice({"double-well", "nwell", "quadratic"}, "base potential")},
      {"xi", list({0.6, 0.4, 0.2}, "hbar values (m = 1)")},
      {"flea", choice({"both", "on", "off"}, "panels with and/or without the flea")},
      {"flea_height", real(1.0, "flea bump height")},
      {"epsilon", real(1e-2, "flea scale")},
      {"states", integer(4, "eigenpairs per panel")},
      {"points", integer(2048, "grid points (double-well, quadratic)")},
      {"n_wells", integer(3, "wells for the periodic potential")},
      {"points_per_well", integer(256, "grid points per well (nwell)")},
      {"omega", real(1.0, "oscillator frequency (quadratic)")},
      {"lambda", real(1.0, "well depth parameter")},
      {"a", real(1.0, "well half-separation")},
  };
  s["flea-sweep"] = {
      {"xi", list({0.1, 0.15, 0.2}, "hbar values (m = 1)")},
      {"eps", list(logspace(-1, -12, 45), "flea scales")},
      {"flea_height", real(100.0, "flea bump height")},
      {"points", integer(2048, "grid points on [-4a, 4a]")},
      {"level", real(0.75, "crossing level reported")},
      {"lambda", real(1.0, "well depth parameter")},
      {"a", real(1.0, "well half-separation")},
  };
  s["nwell"] = {
      {"xi", real(0.2, "hbar (m = 1)")},
      {"n_wells", integer(3, "number of wells")},
      {"flea_wells", list({1.0}, "indices of wells carrying a flea")},
      {"flea_height", real(1e-2, "flea bump height")},
      {"points_per_well", integer(256, "grid points per well")},
      {"lambda", real(1.0, "well depth parameter")},
      {"a", real(1.0, "well half-separation")},
  };
  s["dynamics"] = {
      {"mode", choice({"trajectory", "quench-study"}, "single trajectory or quench statistics")},
      {"schedule", choice({"quench", "sin-ramp", "white-noise", "kicks"}, "time profile of the flea")},
      {"xi", real(0.25, "hbar (m = 1)")},
      {"dt", real(4e-4, "time step")},
      {"t_end", real(40.0, "final time (trajectory)")},
      {"stride", integer(250, "steps between recorded samples")},
      {"flea_height", real(1.0, "flea bump height")},
      {"epsilon", real(1e-3, "quench scale")},
      {"T", real(4.0, "ramp time (sin-ramp)")},
      {"amplitude", real(1e-3, "noise amplitude (white-noise)")},
      {"dt_noise", real(0.1, "noise interval (white-noise)")},
      {"rate", real(0.5, "kick rate (kicks)")},
      {"kick_scale", real(1e-3, "kick size (kicks)")},
      {"eps", list({1e-5, 1e-4, 1e-3, 1e-2}, "quench scales (quench-study)")},
      {"horizon", real(400.0, "time horizon (quench-study)")},
      {"points", integer(240, "grid points on [-3a, 3a]")},
  };
  s["gamma-scan"] = {
      {"hbar", list({}, "hbar values; empty means 9 points uniform in 1/hbar over [0.0125, 0.025]")},
      {"flea_height", real(2e-12, "flea bump height")},
      {"shrink", integer(12, "flea shrink exponent n (scale 10^-n)")},
  };
  s["husimi"] = {
      {"xi", real(0.05, "hbar (m = 1)")},
      {"state", choice({"ground", "flea"}, "symmetric ground state or flea'd ground state")},
      {"flea_height", real(100.0, "flea bump height")},
      {"epsilon", real(1e-3, "flea scale")},
      {"points", integer(2048, "grid points on [-4a, 4a]")},
      {"p_min", real(-3.0, "")},
      {"p_max", real(3.0, "")},
      {"q_min", real(-3.0, "")},
      {"q_max", real(3.0, "")},
      {"n_p", integer(128, "")},
      {"n_q", integer(128, "")},
  };
  s["converge"] = {
      {"hbar", list({0.2, 0.1, 0.05, 0.025}, "decreasing hbar values")},
      {"family", choice({"symmetric", "flea"}, "state family")},
      {"radius", real(0.8, "bump test function radius")},
      {"center_p", real(0.0, "bump center p")},
      {"center_q", real(-1.0, "bump center q")},
      {"flea_height", real(100.0, "flea bump height")},
      {"epsilon", real(1e-3, "flea scale")},
      {"points", integer(2048, "grid points on [-4a, 4a]")},
  };
  s["toy-drift"] = {
      {"flavor", choice({"almost-diagonal", "diagonal"}, "unitary flavor")},
      {"d", integer(16, "environment dimension")},
      {"eps", list({1e-3, 1e-2}, "off-diagonal budgets")},
      {"instances", integer(1000, "instances per eps")},
  };
  s["toy-bound"] = {
      {"d", integer(16, "environment dimension")},
      {"eps1", real(1e-2, "record distance budget")},
      {"eps2", real(1e-2, "unitary distance budget")},
      {"instances", integer(500, "instances")},
  };
  s["sg"] = {
      {"alpha_re", real(std::sqrt(0.5), "")},
      {"alpha_im", real(0.0, "")},
      {"beta_re", real(0.0, "")},
      {"beta_im", real(std::sqrt(0.5), "")},
      {"center_plus", real(3.0, "center of the + packet")},
      {"center_minus", real(-3.0, "center of the - packet")},
      {"sigma", real(1.0, "packet standard deviation")},
      {"slit_lo", real(-inf, "slit lower edge")},
      {"slit_hi", real(inf, "slit upper edge")},
  };
  s["spinchain"] = {
      {"variant", choice({"transverse", "as-printed"}, "field term")},
      {"boundary", choice({"ring", "open"}, "bond topology")},
      {"N", list({4, 6, 8, 10, 12}, "chain lengths")},
      {"B", real(0.5, "field strength")},
      {"eps", real(1e-8, "flea on the all-up state; 0 disables")},
      {"k", integer(2, "eigenpairs")},
  };
  return s;
}

const std::map<std::string, Schema>& schemas() {
  static const auto s = build_schemas();
  return s;
}

Value parse_value(const std::string& key, const ParamSpec& spec, const std::string& text) {
  try {
    switch (spec.type) {
      case ParamType::Real:
        return parse_real(text);
      case ParamType::Integer: {
        const double v = parse_real(text);
        if (v != std::floor(v)) throw ConfigError("not an integer");
        return v;
      }
      case ParamType::RealList:
        return parse_list(text);
      case ParamType::Choice: {
        const std::string t = trim(text);
        if (std::find(spec.choices.begin(), spec.choices.end(), t) == spec.choices.end()) {
          std::string all;
          for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
          throw ConfigError("expected one of {" + all + "}");
        }
        return t;
      }
    }
  } catch (const ConfigError& e) {
    throw ConfigError("bad value '" + text + "' for key '" + key + "': " + e.what());
  }
  throw ConfigError("unreachable");
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, v] : schemas()) n.push_back(k);
    return n;
  }();
  return names;
}

const Schema& schema_for(const std::string& experiment) {
  const auto it = schemas().find(experiment);
  if (it == schemas().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  return it->second;
}

double parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw ConfigError("empty number");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + t + "'");
  }
  if (used != t.size()) throw ConfigError("not a number: '" + t + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text) {
  const std::string t = trim(text);
  auto split = [](const std::string& body) {
    std::vector<std::string> parts;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    return parts;
  };
  if (t.size() >= 2 && t.front() == '[' && t.back() == ']') {
    const std::string body = trim(t.substr(1, t.size() - 2));
    std::vector<double> out;
    if (body.empty()) return out;
    for (const auto& p : split(body)) out.push_back(parse_real(p));
    return out;
  }
  for (const std::string fn : {"linspace", "logspace"}) {
    if (t.rfind(fn + "(", 0) == 0 && t.back() == ')') {
      const auto parts = split(t.substr(fn.size() + 1, t.size() - fn.size() - 2));
      if (parts.size() != 3) throw ConfigError(fn + " needs three arguments");
      const double a = parse_real(parts[0]), b = parse_real(parts[1]), n = parse_real(parts[2]);
      if (n < 1 || n != std::floor(n)) throw ConfigError(fn + " count must be a positive integer");
      const auto count = static_cast<std::size_t>(n);
      if (fn == "logspace") return logspace(a, b, count);
      std::vector<double> v(count);
      for (std::size_t i = 0; i < count; ++i) {
        v[i] = count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
      }
      return v;
    }
  }
  return {parse_real(t)};
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::map<std::string, std::string> raw;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    }
    raw[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return raw;
}

std::pair<std::string, std::string> split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + text + "'");
  return {trim(text.substr(0, eq)), trim(text.substr(eq + 1))};
}

ParamMap resolve(const std::string& experiment, const std::map<std::string, std::string>& raw) {
  const Schema& schema = schema_for(experiment);
  std::map<std::string, Value> values;
  for (const auto& [key, text] : raw) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown key '" + key + "' for experiment " + experiment);
    values[key] = parse_value(key, it->second, text);
  }
  for (const auto& [key, spec] : schema) {
    if (!values.count(key)) values[key] = spec.fallback;
  }
  return ParamMap(experiment, std::move(values));
}

ParamMap resolve(const std::string& experiment, const nlohmann::json& params) {
  const Schema& schema = schema_for(experiment);
  std::map<std::string, Value> values;
  for (const auto& [key, j] : params.items()) {
    const auto it = schema.find(key);
    if (it == schema.end()) throw ConfigError("unknown key '" + key + "' for experiment " + experiment);
    try {
      switch (it->second.type) {
        case ParamType::Real:
        case ParamType::Integer:
          values[key] = j.is_string() ? parse_real(j.get<std::string>()) : j.get<double>();
          break;
        case ParamType::RealList: {
          std::vector<double> v;
          for (const auto& x : j) v.push_back(x.is_string() ? parse_real(x.get<std::string>()) : x.get<double>());
          values[key] = v;
          break;
        }
        case ParamType::Choice:
          values[key] = parse_value(key, it->second, j.get<std::string>());
          break;
      }
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("bad manifest value for key '" + key + "'");
    }
  }
  for (const auto& [key, spec] : schema) {
    if (!values.count(key)) values[key] = spec.fallback;
  }
  return ParamMap(experiment, std::move(values));
}

ParamMap::ParamMap(std::string experiment, std::map<std::string, Value> values)
    : experiment_(std::move(experiment)), values_(std::move(values)) {}

const Value& ParamMap::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "' for experiment " + experiment_);
  return it->second;
}

double ParamMap::real(const std::string& key) const { return std::get<double>(at(key)); }

long long ParamMap::integer(const std::string& key) const {
  return static_cast<long long>(std::get<double>(at(key)));
}

std::vector<double> ParamMap::list(const std::string& key) const { return std::get<std::vector<double>>(at(key)); }

const std::string& ParamMap::choice(const std::string& key) const { return std::get<std::string>(at(key)); }

nlohmann::json ParamMap::to_json() const {
  // Non-finite reals are stored as strings so the manifest stays valid JSON.
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v) && v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
    if (std::isfinite(v)) return v;
    return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
  };
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, v] : values_) {
    if (const auto* d = std::get_if<double>(&v)) {
      j[key] = num(*d);
    } else if (const auto* l = std::get_if<std::vector<double>>(&v)) {
      nlohmann::json arr = nlohmann::json::array();
      for (double x : *l) arr.push_back(num(x));
      j[key] = arr;
    } else {
      j[key] = std::get<std::string>(v);
    }
  }
  return j;
}

}  // namespace flea::cli
