#pragma once

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"

#ifndef SYMRC_VERSION
#define SYMRC_VERSION "0.0.0"
#endif

namespace symrc::harness {

/// One evaluated instance: enough to rebuild its data and reservoir and recompute `metric`.
struct ExperimentRecord {
  std::string experiment_id;
  std::string task;
  int instance = 0;
  std::uint64_t instance_seed = 0;
  std::uint64_t reservoir_seed = 0;
  std::uint64_t train_seed = 0;
  std::uint64_t validation_seed = 0;
  std::uint64_t test_seed = 0;

  int n = 0;  ///< parity order; 0 for inference
  std::string train_set;
  long train_bits = 0;
  std::string test_set;
  long test_bits = 0;

  double train_duration = 0.0;
  double test_duration = 0.0;
  double washout = 0.0;
  bool square_input = false;

  int n_nodes = 0;
  HyperParams params;

  std::string metric_name;  ///< ber | nrmse
  double metric = std::numeric_limits<double>::quiet_NaN();             ///< test set
  double validation_metric = std::numeric_limits<double>::quiet_NaN();  ///< optimizer's best
  int budget = 0;
  int evaluations = 0;
  double wall_time = 0.0;  ///< seconds
  std::string version = SYMRC_VERSION;
  std::string error;  ///< empty when the instance completed

  bool ok() const { return error.empty() && std::isfinite(metric); }
};

inline nlohmann::json to_json(const HyperParams& p) {
  return {{"gamma", p.gamma}, {"rho_r", p.rho_r}, {"rho_in", p.rho_in}, {"sigma", p.sigma},
          {"k", p.k},         {"bias", p.bias},   {"eta_f", p.eta_f},   {"eta_r", p.eta_r},
          {"alpha", p.alpha}, {"t0", p.t0},       {"delta_t", p.delta_t}};
}

inline HyperParams params_from_json(const nlohmann::json& j) {
  HyperParams p;
  p.gamma = j.at("gamma").get<double>();
  p.rho_r = j.at("rho_r").get<double>();
  p.rho_in = j.at("rho_in").get<double>();
  p.sigma = j.at("sigma").get<double>();
  p.k = j.at("k").get<int>();
  p.bias = j.at("bias").get<double>();
  p.eta_f = j.at("eta_f").get<double>();
  p.eta_r = j.at("eta_r").get<double>();
  p.alpha = j.at("alpha").get<double>();
  p.t0 = j.at("t0").get<double>();
  p.delta_t = j.at("delta_t").get<double>();
  return p;
}

namespace detail {

// JSON has no NaN; a missing metric is written as null.
inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline double number_from(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentRecord& r) {
  nlohmann::json j;
  j["experiment_id"] = r.experiment_id;
  j["task"] = r.task;
  j["instance"] = r.instance;
  j["seeds"] = {{"instance", r.instance_seed}, {"reservoir", r.reservoir_seed},
                {"train", r.train_seed},       {"validation", r.validation_seed},
                {"test", r.test_seed}};
  if (r.task == "inference") {
    j["data"] = {{"train_duration", r.train_duration}, {"test_duration", r.test_duration},
                 {"washout", r.washout}, {"square_input", r.square_input}};
  } else {
    j["data"] = {{"n", r.n}, {"train", r.train_set}, {"train_bits", r.train_bits},
                 {"test", r.test_set}, {"test_bits", r.test_bits}};
  }
  j["n_nodes"] = r.n_nodes;
  j["params"] = to_json(r.params);
  j["metric"] = {{"name", r.metric_name}, {"value", detail::number_or_null(r.metric)},
                 {"validation", detail::number_or_null(r.validation_metric)}};
  j["budget"] = r.budget;
  j["evaluations"] = r.evaluations;
  j["wall_time"] = r.wall_time;
  j["version"] = r.version;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline ExperimentRecord record_from_json(const nlohmann::json& j) {
  try {
    ExperimentRecord r;
    r.experiment_id = j.at("experiment_id").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.instance = j.at("instance").get<int>();
    const auto& s = j.at("seeds");
    r.instance_seed = s.at("instance").get<std::uint64_t>();
    r.reservoir_seed = s.at("reservoir").get<std::uint64_t>();
    r.train_seed = s.at("train").get<std::uint64_t>();
    r.validation_seed = s.at("validation").get<std::uint64_t>();
    r.test_seed = s.at("test").get<std::uint64_t>();
    const auto& d = j.at("data");
    if (r.task == "inference") {
      r.train_duration = d.at("train_duration").get<double>();
      r.test_duration = d.at("test_duration").get<double>();
      r.washout = d.at("washout").get<double>();
      r.square_input = d.at("square_input").get<bool>();
    } else {
      r.n = d.at("n").get<int>();
      r.train_set = d.at("train").get<std::string>();
      r.train_bits = d.at("train_bits").get<long>();
      r.test_set = d.at("test").get<std::string>();
      r.test_bits = d.at("test_bits").get<long>();
    }
    r.n_nodes = j.at("n_nodes").get<int>();
    r.params = params_from_json(j.at("params"));
    const auto& m = j.at("metric");
    r.metric_name = m.at("name").get<std::string>();
    r.metric = detail::number_from(m.at("value"));
    r.validation_metric = detail::number_from(m.at("validation"));
    r.budget = j.at("budget").get<int>();
    r.evaluations = j.at("evaluations").get<int>();
    r.wall_time = j.at("wall_time").get<double>();
    r.version = j.at("version").get<std::string>();
    if (j.contains("error")) r.error = j.at("error").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("record", std::string("malformed record: ") + e.what());
  }
}

/// One JSON object per line.
inline std::string to_line(const ExperimentRecord& r) { return to_json(r).dump(); }

inline ExperimentRecord record_from_line(const std::string& line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("record", std::string("not valid JSON: ") + e.what());
  }
  return record_from_json(j);
}

}  // namespace symrc::harness
