#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"
#include "symrc/readout.hpp"
#include "symrc/reservoir.hpp"
#include "symrc/tasks.hpp"

namespace symrc {

// ---------------------------------------------------------------------------
// Metrics

/// Fraction of positions where the two +-1 sequences disagree.
inline double ber(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw ShapeError("ber: length mismatch");
  if (predicted.empty()) throw ParameterError("ber: empty sequences");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) wrong += predicted[i] != truth[i];
  return static_cast<double>(wrong) / static_cast<double>(predicted.size());
}

/// RMSE divided by the (population) standard deviation of the truth.
inline double nrmse(const Vector& predicted, const Vector& truth) {
  if (predicted.size() != truth.size()) throw ShapeError("nrmse: length mismatch");
  if (truth.size() < 1) throw ParameterError("nrmse: empty sequences");
  const double mean = truth.mean();
  const double var = (truth.array() - mean).square().mean();
  if (!(var > 0.0)) throw ParameterError("nrmse: truth is constant, cannot normalize");
  const double mse = (predicted - truth).squaredNorm() / static_cast<double>(truth.size());
  return std::sqrt(mse / var);
}

/// Readout intercept policy: a constant feature is fitted whenever part of the
/// feature map is even (eta_r > 0). A constant is itself even, so even-symmetry
/// arguments survive; with eta_r = 0 the readout stays odd and has no intercept.
inline bool readout_intercept(const HyperParams& p) { return p.eta_r > 0.0; }

// ---------------------------------------------------------------------------
// Parity

enum class ParityScheme { serial, parallel };

inline std::string to_string(ParityScheme s) {
  return s == ParityScheme::serial ? "parity-serial" : "parity-parallel";
}

/// Recurrent in-degree used by each scheme: 10 (capped at N-1) for serial
/// input, 1 for the parallel scheme; 0 for a single node.
inline int parity_k(ParityScheme scheme, int n_nodes) {
  if (n_nodes <= 1) return 0;
  return scheme == ParityScheme::serial ? std::min(10, n_nodes - 1) : 1;
}

struct ParityPipelineConfig {
  int n = 1;
  ParityScheme scheme = ParityScheme::serial;
  int n_nodes = 1;
  HyperParams params;
  BitSeries train_bits;
  BitSeries test_bits;
  double dt = 0.01;    ///< Euler step [T]
  int save_every = 5;  ///< steps between saved states
  std::uint64_t seed = 0;
};

/// Config with the scheme's integration settings (dt, save cadence, k) filled in.
inline ParityPipelineConfig make_parity_config(ParityScheme scheme, int n, int n_nodes,
                                               HyperParams params, BitSeries train,
                                               BitSeries test, std::uint64_t seed) {
  ParityPipelineConfig c;
  c.n = n;
  c.scheme = scheme;
  c.n_nodes = n_nodes;
  params.k = parity_k(scheme, n_nodes);
  c.params = params;
  c.train_bits = std::move(train);
  c.test_bits = std::move(test);
  c.dt = scheme == ParityScheme::serial ? 0.01 : 0.001;
  c.save_every = scheme == ParityScheme::serial ? 5 : 50;
  c.seed = seed;
  return c;
}

struct ParityResult {
  double ber = 1.0;
  std::vector<int> predicted;  ///< one per classified test word
  std::vector<int> truth;
  std::vector<std::size_t> word_index;  ///< index of each word's newest bit
  ReadoutWeights weights;
  long training_samples = 0;
  int distinct_train_inputs = 0;  ///< distinct summed inputs seen in training (parallel)
};

namespace detail {

// Layout of one bit period: saved states at within-period steps
// save_every, 2 save_every, ..., steps; `slots` lists those inside [t0, t0+dT].
struct PeriodLayout {
  int steps = 0;
  int save_every = 1;
  std::vector<int> slots;  // within-period step numbers that fall in the window
};

inline PeriodLayout period_layout(const ParityPipelineConfig& c) {
  if (!(c.dt > 0.0)) throw ConfigError("dt", "must be > 0");
  const double per = 1.0 / c.dt;
  const long steps = std::lround(per);
  if (steps < 1 || std::abs(per - static_cast<double>(steps)) > 1e-9 * per)
    throw ConfigError("dt", "the bit period must be an integer number of steps");
  if (c.save_every < 1 || steps % c.save_every != 0)
    throw ConfigError("save_every", "must divide the number of steps per bit");
  validate_window(c.params);

  PeriodLayout l;
  l.steps = static_cast<int>(steps);
  l.save_every = c.save_every;
  constexpr double kSlack = 1e-9;
  for (int j = c.save_every; j <= l.steps; j += c.save_every) {
    const double t = static_cast<double>(j) * c.dt;
    if (t >= c.params.t0 - kSlack && t <= c.params.t0 + c.params.delta_t + kSlack)
      l.slots.push_back(j);
  }
  if (l.slots.empty())
    throw ConfigError("delta_t", "measurement window [t0, t0+delta_t] holds no saved sample");
  return l;
}

inline void check_parity_config(const ParityPipelineConfig& c) {
  if (c.n < 1) throw ConfigError("n", "parity order must be >= 1");
  if (c.n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
  if (c.train_bits.size() < static_cast<std::size_t>(c.n))
    throw ConfigError("train_bits", "shorter than the parity order");
  if (c.test_bits.size() < static_cast<std::size_t>(c.n))
    throw ConfigError("test_bits", "shorter than the parity order");
  detail::require_bits(c.train_bits.bits, "train_bits");
  detail::require_bits(c.test_bits.bits, "test_bits");
}

inline Matrix parity_targets(const std::vector<int>& labels, std::size_t rows_per_word) {
  Matrix y(static_cast<Eigen::Index>(labels.size() * rows_per_word), 2);
  for (std::size_t w = 0; w < labels.size(); ++w) {
    const double first = labels[w] == 1 ? 1.0 : 0.0;
    for (std::size_t r = 0; r < rows_per_word; ++r) {
      y(static_cast<Eigen::Index>(w * rows_per_word + r), 0) = first;
      y(static_cast<Eigen::Index>(w * rows_per_word + r), 1) = 1.0 - first;
    }
  }
  return y;
}

// +1 when the window-averaged first component wins; ties go to +1.
inline int classify(const ReadoutWeights& w, const Vector& mean_features) {
  const Vector v = predict_one(w, mean_features);
  return v[0] >= v[1] ? 1 : -1;
}

// Serial drive: every bit is held at the scalar input for one period and the
// reservoir runs through the whole series without resets. Returns, for each
// word t >= n-1, its in-window feature rows (stacked in word order).
inline FeatureTrajectory serial_features(ReservoirMachine& m, const BitSeries& bits, int n,
                                         const PeriodLayout& layout, double dt) {
  reset(m);
  const std::size_t words = bits.size() - static_cast<std::size_t>(n) + 1;
  FeatureTrajectory out;
  out.features.resize(static_cast<Eigen::Index>(words * layout.slots.size()), m.n_nodes);
  out.step_indices.reserve(static_cast<std::size_t>(out.features.rows()));
  out.word_ids.reserve(static_cast<std::size_t>(out.features.rows()));
  const Vector column = m.w_in.col(0);
  Vector drive(m.n_nodes);
  Vector g(m.n_nodes);
  Eigen::Index row = 0;
  long step = 0;
  for (std::size_t b = 0; b < bits.size(); ++b) {
    drive = column * static_cast<double>(bits.bits[b]);
    const bool classified = b + 1 >= static_cast<std::size_t>(n);
    std::size_t slot = 0;
    for (int j = 1; j <= layout.steps; ++j) {
      euler_step_drive(m, drive, dt, ++step);
      if (classified && slot < layout.slots.size() && layout.slots[slot] == j) {
        g = m.state;
        apply_feature_map(g, m.params.eta_r);
        out.features.row(row) = g.transpose();
        out.step_indices.push_back(step);
        out.word_ids.push_back(static_cast<long>(b));
        ++row;
        ++slot;
      }
    }
  }
  return out;
}

// Parallel drive for one word with summed input `sum`: reset, hold the
// constant drive w_in * sum for one period, return in-window feature rows.
inline Matrix parallel_word_features(ReservoirMachine& m, int sum, const PeriodLayout& layout,
                                     double dt) {
  reset(m);
  const Vector drive = m.w_in.col(0) * static_cast<double>(sum);
  Matrix rows(static_cast<Eigen::Index>(layout.slots.size()), m.n_nodes);
  std::size_t slot = 0;
  for (int j = 1; j <= layout.steps && slot < layout.slots.size(); ++j) {
    euler_step_drive(m, drive, dt, j);
    if (layout.slots[slot] == j) {
      Vector g = m.state;
      apply_feature_map(g, m.params.eta_r);
      rows.row(static_cast<Eigen::Index>(slot)) = g.transpose();
      ++slot;
    }
  }
  return rows;
}

inline std::vector<int> word_labels(const BitSeries& bits, int n) {
  std::vector<int> labels;
  labels.reserve(bits.size() - static_cast<std::size_t>(n) + 1);
  for (std::size_t t = static_cast<std::size_t>(n) - 1; t < bits.size(); ++t)
    labels.push_back(parity(bits.window(t, n)));
  return labels;
}

inline std::vector<int> word_sums(const BitSeries& bits, int n) {
  std::vector<int> sums;
  sums.reserve(bits.size() - static_cast<std::size_t>(n) + 1);
  int s = 0;
  for (std::size_t t = 0; t < bits.size(); ++t) {
    s += bits.bits[t];
    if (t >= static_cast<std::size_t>(n)) s -= bits.bits[t - static_cast<std::size_t>(n)];
    if (t + 1 >= static_cast<std::size_t>(n)) sums.push_back(s);
  }
  return sums;
}

}  // namespace detail

/// Serial-input parity: continuous drive, window-averaged two-component readout.
inline ParityResult run_parity_serial(const ParityPipelineConfig& c) {
  detail::check_parity_config(c);
  const auto layout = detail::period_layout(c);
  ReservoirMachine m = instantiate(c.n_nodes, 1, c.params, c.seed);

  const auto train = detail::serial_features(m, c.train_bits, c.n, layout, c.dt);
  const auto train_labels = detail::word_labels(c.train_bits, c.n);
  const Matrix targets = detail::parity_targets(train_labels, layout.slots.size());

  ParityResult res;
  res.weights = train_ridge(train.features, targets, c.params.alpha, readout_intercept(c.params));
  res.training_samples = train.features.rows();

  const auto test = detail::serial_features(m, c.test_bits, c.n, layout, c.dt);
  res.truth = detail::word_labels(c.test_bits, c.n);
  const auto per_word = static_cast<Eigen::Index>(layout.slots.size());
  res.predicted.reserve(res.truth.size());
  for (std::size_t w = 0; w < res.truth.size(); ++w) {
    const Vector mean =
        test.features.middleRows(static_cast<Eigen::Index>(w) * per_word, per_word)
            .colwise()
            .mean()
            .transpose();
    res.predicted.push_back(detail::classify(res.weights, mean));
    res.word_index.push_back(w + static_cast<std::size_t>(c.n) - 1);
  }
  res.ber = ber(res.predicted, res.truth);
  return res;
}

/// Tapped-delay parallel parity: each word's bits are broadcast with one weight
/// per node (so the drive is w * sum(bits)), the reservoir is reset per word.
///
/// Words with equal sums produce bit-identical features, so responses are
/// computed once per distinct sum.
inline ParityResult run_parity_parallel(const ParityPipelineConfig& c) {
  detail::check_parity_config(c);
  const auto layout = detail::period_layout(c);
  ReservoirMachine m = instantiate(c.n_nodes, 1, c.params, c.seed);

  std::map<int, Matrix> responses;
  auto response = [&](int sum) -> const Matrix& {
    auto it = responses.find(sum);
    if (it == responses.end())
      it = responses.emplace(sum, detail::parallel_word_features(m, sum, layout, c.dt)).first;
    return it->second;
  };

  const auto train_sums = detail::word_sums(c.train_bits, c.n);
  const auto train_labels = detail::word_labels(c.train_bits, c.n);
  const auto per_word = static_cast<Eigen::Index>(layout.slots.size());
  Matrix features(static_cast<Eigen::Index>(train_sums.size()) * per_word, c.n_nodes);
  for (std::size_t w = 0; w < train_sums.size(); ++w)
    features.middleRows(static_cast<Eigen::Index>(w) * per_word, per_word) =
        response(train_sums[w]);
  const Matrix targets = detail::parity_targets(train_labels, layout.slots.size());

  ParityResult res;
  res.distinct_train_inputs = static_cast<int>(responses.size());
  res.weights = train_ridge(features, targets, c.params.alpha, readout_intercept(c.params));
  res.training_samples = features.rows();

  std::map<int, int> decision;
  const auto test_sums = detail::word_sums(c.test_bits, c.n);
  res.truth = detail::word_labels(c.test_bits, c.n);
  res.predicted.reserve(test_sums.size());
  res.word_index.reserve(test_sums.size());
  for (std::size_t w = 0; w < test_sums.size(); ++w) {
    auto it = decision.find(test_sums[w]);
    if (it == decision.end()) {
      const Vector mean = response(test_sums[w]).colwise().mean().transpose();
      it = decision.emplace(test_sums[w], detail::classify(res.weights, mean)).first;
    }
    res.predicted.push_back(it->second);
    res.word_index.push_back(w + static_cast<std::size_t>(c.n) - 1);
  }
  res.ber = ber(res.predicted, res.truth);
  return res;
}

inline ParityResult run_parity(const ParityPipelineConfig& c) {
  return c.scheme == ParityScheme::serial ? run_parity_serial(c) : run_parity_parallel(c);
}

// ---------------------------------------------------------------------------
// Lorenz inference

/// Recurrent in-degree for the inference reservoir.
inline constexpr int kInferenceK = 5;

struct InferencePipelineConfig {
  int n_nodes = 100;
  HyperParams params;
  LorenzDataset train;
  LorenzDataset test;
  double reservoir_dt = 0.005;
  double washout = 1.0;  ///< time discarded at the start of each feature run
  std::uint64_t seed = 0;
};

struct InferenceResult {
  double nrmse = 0.0;
  Vector inferred;  ///< post-washout test predictions
  Vector truth;
  ReadoutWeights weights;
};

/// Drives a zero-state reservoir with one Euler step per input row; row i of
/// the result is g(r) after consuming input row i.
inline Matrix inference_features(ReservoirMachine& m, const Matrix& inputs, double dt) {
  reset(m);
  Matrix g(inputs.rows(), m.n_nodes);
  Vector drive(m.n_nodes);
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    drive.noalias() = m.w_in * inputs.row(i).transpose();
    euler_step_drive(m, drive, dt, static_cast<long>(i) + 1);
    g.row(i) = m.state.transpose();
  }
  return feature_map_rows(std::move(g), m.params.eta_r);
}

inline InferenceResult run_inference(const InferencePipelineConfig& c) {
  if (c.n_nodes < 1) throw ConfigError("n_nodes", "must be >= 1");
  if (!(c.reservoir_dt > 0.0)) throw ConfigError("reservoir_dt", "must be > 0");
  for (const LorenzDataset* d : {&c.train, &c.test}) {
    if (d->samples() < 1 || d->input.cols() != 2) throw ConfigError("dataset", "empty or malformed");
    if (std::abs(d->sample_dt - c.reservoir_dt) > 1e-12)
      throw ConfigError("reservoir_dt", "must equal the dataset sample_dt");
  }
  if (c.train.square_input != c.test.square_input)
    throw ConfigError("square_input", "train and test datasets disagree");
  const long washout = std::lround(c.washout / c.reservoir_dt);
  if (washout < 0) throw ConfigError("washout", "must be >= 0");
  if (washout >= c.train.samples() || washout >= c.test.samples())
    throw ConfigError("washout", "must be shorter than the dataset duration");

  ReservoirMachine m = instantiate(c.n_nodes, 2, c.params, c.seed);

  const Matrix train_g = inference_features(m, c.train.input, c.reservoir_dt);
  const Eigen::Index train_rows = c.train.samples() - washout;
  InferenceResult res;
  res.weights = train_ridge(train_g.bottomRows(train_rows), c.train.target.tail(train_rows),
                            c.params.alpha, readout_intercept(c.params));

  const Matrix test_g = inference_features(m, c.test.input, c.reservoir_dt);
  const Eigen::Index test_rows = c.test.samples() - washout;
  res.inferred = predict(res.weights, test_g.bottomRows(test_rows)).col(0);
  res.truth = c.test.target.tail(test_rows);
  res.nrmse = nrmse(res.inferred, res.truth);
  return res;
}

}  // namespace symrc
