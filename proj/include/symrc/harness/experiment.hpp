#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "symrc/harness/config.hpp"
#include "symrc/harness/record.hpp"
#include "symrc/harness/seeding.hpp"
#include "symrc/harness/stats.hpp"
#include "symrc/harness/workers.hpp"
#include "symrc/hyperopt.hpp"
#include "symrc/pipelines.hpp"

namespace symrc::harness {

/// One grid point: parity order (0 for inference), reservoir size, readout squaring.
struct Cell {
  int n = 0;
  int n_nodes = 1;
  double eta_r = 0.0;  ///< may be kEtaAuto
};

inline std::uint64_t task_code(const std::string& task) {
  if (task == kParitySerial) return 1;
  if (task == kParityParallel) return 2;
  if (task == kInference) return 3;
  throw ConfigError("task", "unknown task '" + task + "'");
}

inline int inference_k(int n_nodes) { return std::min(kInferenceK, n_nodes - 1); }

/// Fills seeds, data description and base parameters for one instance.
///
/// The instance seed depends on (task, n, N, instance) but not on eta_r, so
/// runs that differ only in readout squaring share reservoir and data.
inline ExperimentRecord plan_instance(const ExperimentConfig& c, const Cell& cell, int instance) {
  ExperimentRecord r;
  r.experiment_id = c.id;
  r.task = c.task;
  r.instance = instance;
  r.instance_seed = derive_seed(c.seed, {task_code(c.task), static_cast<std::uint64_t>(cell.n),
                                         static_cast<std::uint64_t>(cell.n_nodes),
                                         static_cast<std::uint64_t>(instance)});
  r.reservoir_seed = stream_seed(r.instance_seed, Stream::reservoir);
  r.train_seed = stream_seed(r.instance_seed, Stream::train);
  r.validation_seed = stream_seed(r.instance_seed, Stream::validation);
  r.test_seed = stream_seed(r.instance_seed, Stream::test);
  r.n_nodes = cell.n_nodes;
  r.budget = c.budget;

  HyperParams p = c.fixed;
  p.eta_f = c.eta_f;
  p.bias = c.bias;
  p.alpha = c.alpha;
  if (is_parity(c.task)) {
    r.n = cell.n;
    r.train_set = c.train_set;
    r.train_bits = c.train_bits;
    r.test_set = c.test_set;
    r.test_bits = c.test_bits;
    r.metric_name = "ber";
    p.eta_r = resolve_eta_r(cell.eta_r, cell.n);
    p.k = parity_k(c.task == kParitySerial ? ParityScheme::serial : ParityScheme::parallel,
                   cell.n_nodes);
  } else {
    r.train_duration = c.train_duration;
    r.test_duration = c.test_duration;
    r.washout = c.washout;
    r.square_input = c.square_input;
    r.metric_name = "nrmse";
    p.eta_r = cell.eta_r;
    p.k = inference_k(cell.n_nodes);
    p.t0 = 0.0;
    p.delta_t = 1.0;
  }
  r.params = p;
  return r;
}

/// Random bits that contain every n-bit pattern whenever the length allows it
/// (length >= 2^n + n - 1); redrawn with derived seeds until they do.
inline BitSeries covering_random_bits(long length, int n, std::uint64_t seed) {
  if (length < n) throw ConfigError("train_bits", "shorter than the parity order");
  const bool coverable = n <= 24 && length >= (1L << n) + n - 1;
  for (std::uint64_t attempt = 0; attempt < 1000; ++attempt) {
    auto bits = random_bits(static_cast<std::size_t>(length), derive_seed(seed, {attempt}));
    if (!coverable || coverage_check(bits, n).complete) return bits;
  }
  throw ConfigError("train_bits", "no covering series found after 1000 draws; use more bits");
}

struct InstanceData {
  BitSeries train, validation, test;
  LorenzDataset lorenz_train, lorenz_validation, lorenz_test;
};

inline InstanceData build_data(const ExperimentRecord& r) {
  InstanceData d;
  if (r.task == kInference) {
    d.lorenz_train = make_inference_dataset(r.train_duration, r.square_input, r.train_seed);
    d.lorenz_validation =
        make_inference_dataset(r.test_duration, r.square_input, r.validation_seed);
    d.lorenz_test = make_inference_dataset(r.test_duration, r.square_input, r.test_seed);
    return d;
  }
  d.train = r.train_set == "minimal" ? minimal_training_bits(r.n)
                                     : covering_random_bits(r.train_bits, r.n, r.train_seed);
  if (r.test_set == "exhaustive") {
    d.test = exhaustive_bits(r.n);
    d.validation = d.test;
  } else {
    d.validation = covering_random_bits(r.test_bits, r.n, r.validation_seed);
    d.test = covering_random_bits(r.test_bits, r.n, r.test_seed);
  }
  return d;
}

/// Raw per-word or per-sample outputs of one evaluation.
struct RawOutput {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Metric of parameters `p` on the validation or the test split.
inline double evaluate(const ExperimentRecord& r, const HyperParams& p, const InstanceData& d,
                       bool on_test, RawOutput* raw = nullptr) {
  if (r.task == kInference) {
    InferencePipelineConfig c;
    c.n_nodes = r.n_nodes;
    c.params = p;
    c.train = d.lorenz_train;
    c.test = on_test ? d.lorenz_test : d.lorenz_validation;
    c.washout = r.washout;
    c.seed = r.reservoir_seed;
    const auto res = run_inference(c);
    if (raw) {
      raw->columns = {"t", "z", "inferred"};
      raw->rows.clear();
      const Eigen::Index offset = c.test.samples() - res.truth.size();
      for (Eigen::Index i = 0; i < res.truth.size(); ++i)
        raw->rows.push_back({c.test.times[offset + i], res.truth[i], res.inferred[i]});
    }
    return res.nrmse;
  }
  const auto scheme = r.task == kParitySerial ? ParityScheme::serial : ParityScheme::parallel;
  auto c = make_parity_config(scheme, r.n, r.n_nodes, p, d.train,
                              on_test ? d.test : d.validation, r.reservoir_seed);
  const auto res = run_parity(c);
  if (raw) {
    raw->columns = {"word", "truth", "predicted"};
    raw->rows.clear();
    for (std::size_t w = 0; w < res.predicted.size(); ++w)
      raw->rows.push_back({static_cast<double>(res.word_index[w]),
                           static_cast<double>(res.truth[w]),
                           static_cast<double>(res.predicted[w])});
  }
  return res.ber;
}

inline SearchSpace search_space(const std::string& task) {
  if (task == kParitySerial) return SearchSpace::serial_parity();
  if (task == kParityParallel) return SearchSpace::parallel_parity();
  return SearchSpace::inference();
}

/// Optimizer settings per task: BER failures cost 1 and a zero BER ends the
/// search; NRMSE failures cost 10x the worst value seen.
inline OptimizerOptions optimizer_options(const std::string& task, int budget,
                                          int initial_points = 10, int candidates = 1000) {
  OptimizerOptions o;
  o.budget = budget;
  o.initial_points = initial_points;
  o.candidates = candidates;
  if (is_parity(task)) {
    o.penalty = PenaltyPolicy::fixed_value(1.0);
    o.stop_at = 0.0;
  } else {
    o.penalty = PenaltyPolicy::multiple_of_worst(10.0);
  }
  return o;
}

struct InstanceResult {
  ExperimentRecord record;
  RawOutput raw;
};

/// Optimizes on the validation split (when budget > 0), then scores the chosen
/// parameters on the test split. Failures are recorded, not thrown.
inline InstanceResult execute(ExperimentRecord r, int initial_points = 10, int candidates = 1000) {
  const auto start = std::chrono::steady_clock::now();
  InstanceResult out;
  try {
    const InstanceData data = build_data(r);
    if (r.budget > 0) {
      const auto space = search_space(r.task);
      const HyperParams base = r.params;
      auto objective = [&](std::span<const double> v) {
        return evaluate(r, apply_params(base, space, v), data, false);
      };
      const auto opt = optimizer_options(r.task, r.budget, initial_points, candidates);
      const auto best = optimize(objective, space, opt, stream_seed(r.instance_seed, Stream::optimizer));
      r.params = apply_params(base, space, best.best);
      r.validation_metric = best.best_value;
      r.evaluations = best.trace.budget_used;
    }
    r.metric = evaluate(r, r.params, data, true, &out.raw);
  } catch (const std::exception& e) {
    r.error = e.what();
    r.metric = std::numeric_limits<double>::quiet_NaN();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.record = std::move(r);
  return out;
}

/// Recomputes a record's test metric from the record alone.
inline double rerun(const ExperimentRecord& r) {
  const InstanceData data = build_data(r);
  return evaluate(r, r.params, data, true);
}

/// Runs every instance of one cell on the worker pool; results in instance order.
inline std::vector<InstanceResult> run_cell(const ExperimentConfig& c, const Cell& cell,
                                            int workers) {
  std::vector<InstanceResult> results(static_cast<std::size_t>(c.instances));
  parallel_for(results.size(), workers, [&](std::size_t i) {
    results[i] = execute(plan_instance(c, cell, static_cast<int>(i)), c.initial_points,
                         c.candidates);
  });
  return results;
}

inline std::vector<InstanceResult> run_experiment(const ExperimentConfig& c, int workers) {
  validate(c);
  return run_cell(c, Cell{is_parity(c.task) ? c.n : 0, c.n_nodes, c.eta_r}, workers);
}

/// Aggregate of one sweep cell over its successful instances.
struct SweepRow {
  std::string task;
  int n = 0;
  double eta_r = 0.0;  ///< resolved value
  int n_nodes = 0;
  int instances = 0;
  int failed = 0;
  Summary summary;  ///< over successful instances; count 0 if none
  bool complete = false;  ///< every instance produced a metric
};

inline SweepRow aggregate(const std::string& task, const Cell& cell,
                          const std::vector<ExperimentRecord>& records) {
  SweepRow row;
  row.task = task;
  row.n = cell.n;
  row.eta_r = is_parity(task) ? resolve_eta_r(cell.eta_r, cell.n) : cell.eta_r;
  row.n_nodes = cell.n_nodes;
  row.instances = static_cast<int>(records.size());
  std::vector<double> values;
  for (const auto& r : records) {
    if (r.ok()) values.push_back(r.metric);
    else ++row.failed;
  }
  row.complete = row.failed == 0;
  if (!values.empty()) row.summary = summarize(values);
  return row;
}

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<InstanceResult> instances;
};

/// Grid over n x eta_r x N (N innermost). For BER tasks with the stop rule on,
/// N stops increasing in a column once every instance reaches BER = 0.
inline SweepResult run_sweep(const ExperimentConfig& c, int workers,
                             const std::function<void(const SweepRow&)>& progress = {}) {
  validate(c, true);
  const bool parity = is_parity(c.task);
  const std::vector<int> ns = !parity ? std::vector<int>{0}
                              : c.sweep_n.empty() ? std::vector<int>{c.n}
                                                  : c.sweep_n;
  const std::vector<int> nodes = c.sweep_nodes.empty() ? std::vector<int>{c.n_nodes} : c.sweep_nodes;
  const std::vector<double> etas =
      c.sweep_eta_r.empty() ? std::vector<double>{c.eta_r} : c.sweep_eta_r;

  SweepResult out;
  for (int n : ns) {
    for (double eta : etas) {
      for (int n_nodes : nodes) {
        const Cell cell{n, n_nodes, eta};
        auto results = run_cell(c, cell, workers);
        std::vector<ExperimentRecord> records;
        for (const auto& r : results) records.push_back(r.record);
        const SweepRow row = aggregate(c.task, cell, records);
        out.rows.push_back(row);
        for (auto& r : results) out.instances.push_back(std::move(r));
        if (progress) progress(row);
        const bool all_zero = row.complete && row.summary.count > 0 && row.summary.max == 0.0;
        if (parity && c.stop_rule && all_zero) break;
      }
    }
  }
  return out;
}

/// Smallest N per (n, eta_r) column with at least one / every instance at zero
/// error; 0 when never reached.
struct ZeroErrorPoint {
  int n = 0;
  double eta_r = 0.0;
  int first_any = 0;
  int first_all = 0;
};

inline std::vector<ZeroErrorPoint> zero_error_points(const std::vector<SweepRow>& rows) {
  std::vector<ZeroErrorPoint> pts;
  for (const auto& row : rows) {
    if (pts.empty() || pts.back().n != row.n || pts.back().eta_r != row.eta_r)
      pts.push_back({row.n, row.eta_r, 0, 0});
    auto& p = pts.back();
    if (row.summary.count == 0) continue;
    if (p.first_any == 0 && row.summary.min == 0.0) p.first_any = row.n_nodes;
    if (p.first_all == 0 && row.complete && row.summary.max == 0.0) p.first_all = row.n_nodes;
  }
  return pts;
}

inline void write_sweep_table(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "task\tn\teta_r\tN\tinstances\tfailed\tmean\tzero_fraction\tmin\tq1\tmedian\tq3\tmax\t"
        "complete\n";
  os.precision(10);
  for (const auto& r : rows) {
    const auto& s = r.summary;
    os << r.task << '\t' << r.n << '\t' << r.eta_r << '\t' << r.n_nodes << '\t' << r.instances
       << '\t' << r.failed << '\t';
    if (s.count == 0) {
      os << "nan\tnan\tnan\tnan\tnan\tnan\tnan";
    } else {
      os << s.mean << '\t' << s.zero_fraction << '\t' << s.min << '\t' << s.q1 << '\t' << s.median
         << '\t' << s.q3 << '\t' << s.max;
    }
    os << '\t' << (r.complete ? 1 : 0) << '\n';
  }
}

inline void write_zero_points(std::ostream& os, const std::vector<ZeroErrorPoint>& pts) {
  os << "n\teta_r\tN_any_zero\tN_all_zero\n";
  for (const auto& p : pts)
    os << p.n << '\t' << p.eta_r << '\t' << p.first_any << '\t' << p.first_all << '\n';
}

inline void write_raw(std::ostream& os, const RawOutput& raw) {
  for (std::size_t i = 0; i < raw.columns.size(); ++i)
    os << (i ? "\t" : "") << raw.columns[i];
  os << '\n';
  os.precision(17);
  for (const auto& row : raw.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "\t" : "") << row[i];
    os << '\n';
  }
}

}  // namespace symrc::harness
