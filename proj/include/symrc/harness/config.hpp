#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"

namespace symrc::harness {

inline constexpr const char* kParitySerial = "parity-serial";
inline constexpr const char* kParityParallel = "parity-parallel";
inline constexpr const char* kInference = "inference";

inline bool is_parity(const std::string& task) {
  return task == kParitySerial || task == kParityParallel;
}

/// eta_r value meaning "respect the parity-order symmetry": 1 for even n, 0 for odd n.
inline constexpr double kEtaAuto = -1.0;

inline double resolve_eta_r(double eta_r, int n) {
  if (eta_r != kEtaAuto) return eta_r;
  return n % 2 == 0 ? 1.0 : 0.0;
}

/// Everything an experiment or sweep needs, as read from an INI file.
///
///   [experiment] id task seed instances budget workers
///   [parity]     n train train_bits test test_bits
///   [inference]  train_duration test_duration washout square_input
///   [reservoir]  n_nodes eta_r eta_f bias alpha
///   [params]     gamma rho_r rho_in sigma t0 delta_t   (used when budget = 0)
///   [optimizer]  initial_points candidates
///   [sweep]      n n_nodes eta_r stop_rule
struct ExperimentConfig {
  std::string id = "experiment";
  std::string task;
  std::uint64_t seed = 1;
  int instances = 1;
  int budget = 60;
  int workers = 0;

  int n = 0;
  std::string train_set = "random";  ///< random | minimal
  long train_bits = 1000;
  std::string test_set = "random";   ///< random | exhaustive
  long test_bits = 1000;

  double train_duration = 100.0;
  double test_duration = 100.0;
  double washout = 1.0;
  bool square_input = false;

  int n_nodes = 0;
  double eta_r = 0.0;  ///< or kEtaAuto
  double eta_f = 0.0;
  double bias = 0.0;
  double alpha = 1e-6;

  HyperParams fixed;  ///< gamma, rho_r, rho_in, sigma, t0, delta_t when not optimizing

  int initial_points = 10;
  int candidates = 1000;

  std::vector<int> sweep_n;
  std::vector<int> sweep_nodes;
  std::vector<double> sweep_eta_r;
  bool stop_rule = true;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"id", "task", "seed", "instances", "budget", "workers"}},
      {"parity", {"n", "train", "train_bits", "test", "test_bits"}},
      {"inference", {"train_duration", "test_duration", "washout", "square_input"}},
      {"reservoir", {"n_nodes", "eta_r", "eta_f", "bias", "alpha"}},
      {"params", {"gamma", "rho_r", "rho_in", "sigma", "t0", "delta_t"}},
      {"optimizer", {"initial_points", "candidates"}},
      {"sweep", {"n", "n_nodes", "eta_r", "stop_rule"}},
  };
  return keys;
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& text) {
  std::istringstream in(trim(text));
  T v{};
  if constexpr (std::is_same_v<T, bool>) {
    std::string w;
    in >> w;
    if (w == "true" || w == "1" || w == "yes") return true;
    if (w == "false" || w == "0" || w == "no") return false;
    throw ConfigError(key, "expected a boolean, got '" + text + "'");
  } else {
    in >> v;
    if (in.fail() || !in.eof()) throw ConfigError(key, "cannot parse '" + text + "'");
  }
  return v;
}

inline double parse_eta(const std::string& key, const std::string& text) {
  if (trim(text) == "auto") return kEtaAuto;
  return parse_value<double>(key, text);
}

// "1,2,5" or an inclusive range "2:7".
inline std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  const std::string t = trim(text);
  if (const auto colon = t.find(':'); colon != std::string::npos) {
    const int lo = parse_value<int>(key, t.substr(0, colon));
    const int hi = parse_value<int>(key, t.substr(colon + 1));
    if (hi < lo) throw ConfigError(key, "empty range '" + text + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
    return out;
  }
  std::istringstream in(t);
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_value<int>(key, item));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

inline std::vector<double> parse_eta_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(trim(text));
  for (std::string item; std::getline(in, item, ',');) out.push_back(parse_eta(key, item));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

}  // namespace detail

/// Checks ranges and task-specific requirements; throws ConfigError naming the key.
/// A sweep may take n and n_nodes from its [sweep] lists instead.
inline void validate(const ExperimentConfig& c, bool sweep = false) {
  auto need = [](bool ok, const char* key, const char* what) {
    if (!ok) throw ConfigError(key, what);
  };
  need(!c.task.empty(), "task", "missing [experiment] task");
  need(c.task == kParitySerial || c.task == kParityParallel || c.task == kInference, "task",
       "must be parity-serial, parity-parallel or inference");
  need(c.instances >= 1, "instances", "must be >= 1");
  need(c.budget >= 0, "budget", "must be >= 0");
  need(c.budget == 0 || c.budget >= c.initial_points, "budget",
       "must be 0 (fixed parameters) or >= initial_points");
  need(c.initial_points >= 1, "initial_points", "must be >= 1");
  need(c.candidates >= 1, "candidates", "must be >= 1");
  need(c.eta_f >= 0.0 && c.eta_f <= 1.0, "eta_f", "must lie in [0, 1]");
  need(c.alpha >= 0.0, "alpha", "must be >= 0");
  auto eta_ok = [&](double e) {
    return (e >= 0.0 && e <= 1.0) || (e == kEtaAuto && is_parity(c.task));
  };
  need(eta_ok(c.eta_r), "eta_r", "must lie in [0, 1] (or auto for parity)");
  for (double e : c.sweep_eta_r) need(eta_ok(e), "eta_r", "must lie in [0, 1] (or auto for parity)");
  need((sweep && !c.sweep_nodes.empty()) || c.n_nodes >= 1, "n_nodes", "missing or < 1");
  for (int v : c.sweep_nodes) need(v >= 1, "n_nodes", "must be >= 1");

  if (is_parity(c.task)) {
    need((sweep && !c.sweep_n.empty()) || c.n >= 1, "n", "parity order missing or < 1");
    for (int v : c.sweep_n) need(v >= 1, "n", "must be >= 1");
    need(c.train_set == "random" || c.train_set == "minimal", "train", "must be random or minimal");
    need(c.test_set == "random" || c.test_set == "exhaustive", "test",
         "must be random or exhaustive");
    need(c.train_bits >= 1, "train_bits", "must be >= 1");
    need(c.test_bits >= 1, "test_bits", "must be >= 1");
    if (c.budget == 0) {
      try {
        validate_window(c.fixed);
      } catch (const ParameterError& e) {
        throw ConfigError("t0", e.what());
      }
    }
  } else {
    need(c.train_duration > c.washout, "train_duration", "must exceed the washout");
    need(c.test_duration > c.washout, "test_duration", "must exceed the washout");
    need(c.washout >= 0.0, "washout", "must be >= 0");
  }
  if (c.budget == 0) {
    need(c.fixed.gamma > 0.0, "gamma", "must be > 0");
    need(c.fixed.rho_r > 0.0, "rho_r", "must be > 0");
    need(c.fixed.rho_in >= 0.0, "rho_in", "must be >= 0");
    need(c.fixed.sigma >= 0.0 && c.fixed.sigma <= 1.0, "sigma", "must lie in [0, 1]");
  }
}

/// Reads an INI property tree; unknown sections and keys are errors.
inline ExperimentConfig parse_config(const boost::property_tree::ptree& tree) {
  using detail::parse_value;
  for (const auto& [section, body] : tree) {
    const auto it = detail::known_keys().find(section);
    if (it == detail::known_keys().end())
      throw ConfigError(section, "unknown section [" + section + "]");
    for (const auto& [key, value] : body) {
      (void)value;
      if (!it->second.count(key)) throw ConfigError(key, "unknown key in [" + section + "]");
    }
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(boost::property_tree::ptree::path_type(path, '.')))
      return *v;
    return std::nullopt;
  };
  auto key_of = [](const std::string& path) { return path.substr(path.find('.') + 1); };
  ExperimentConfig c;
  auto read = [&]<class T>(const std::string& path, T& field) {
    if (auto v = get(path)) field = parse_value<T>(key_of(path), *v);
  };

  if (auto v = get("experiment.id")) c.id = detail::trim(*v);
  if (auto v = get("experiment.task")) c.task = detail::trim(*v);
  read("experiment.seed", c.seed);
  read("experiment.instances", c.instances);
  read("experiment.budget", c.budget);
  read("experiment.workers", c.workers);

  read("parity.n", c.n);
  if (auto v = get("parity.train")) c.train_set = detail::trim(*v);
  read("parity.train_bits", c.train_bits);
  if (auto v = get("parity.test")) c.test_set = detail::trim(*v);
  read("parity.test_bits", c.test_bits);

  read("inference.train_duration", c.train_duration);
  read("inference.test_duration", c.test_duration);
  read("inference.washout", c.washout);
  read("inference.square_input", c.square_input);

  read("reservoir.n_nodes", c.n_nodes);
  if (auto v = get("reservoir.eta_r")) c.eta_r = detail::parse_eta("eta_r", *v);
  read("reservoir.eta_f", c.eta_f);
  read("reservoir.bias", c.bias);
  read("reservoir.alpha", c.alpha);

  read("params.gamma", c.fixed.gamma);
  read("params.rho_r", c.fixed.rho_r);
  read("params.rho_in", c.fixed.rho_in);
  read("params.sigma", c.fixed.sigma);
  read("params.t0", c.fixed.t0);
  read("params.delta_t", c.fixed.delta_t);

  read("optimizer.initial_points", c.initial_points);
  read("optimizer.candidates", c.candidates);

  if (auto v = get("sweep.n")) c.sweep_n = detail::parse_int_list("n", *v);
  if (auto v = get("sweep.n_nodes")) c.sweep_nodes = detail::parse_int_list("n_nodes", *v);
  if (auto v = get("sweep.eta_r")) c.sweep_eta_r = detail::parse_eta_list("eta_r", *v);
  read("sweep.stop_rule", c.stop_rule);

  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
  }
  return parse_config(tree);
}

inline ExperimentConfig load_config(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("", std::string("cannot read config: ") + e.message() + " (" + path +
                              ", line " + std::to_string(e.line()) + ")");
  }
  return parse_config(tree);
}

}  // namespace symrc::harness
