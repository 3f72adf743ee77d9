#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "symrc/errors.hpp"
#include "symrc/reservoir.hpp"

namespace symrc {

/// A stream of +-1 bits, each held for `bit_period` time units.
struct BitSeries {
  std::vector<int> bits;
  double bit_period = 1.0;

  std::size_t size() const { return bits.size(); }
  std::span<const int> window(std::size_t end_index, int n) const {
    return std::span<const int>(bits).subspan(end_index + 1 - static_cast<std::size_t>(n),
                                              static_cast<std::size_t>(n));
  }
};

namespace detail {

inline void require_bits(std::span<const int> bits, const char* where) {
  for (int b : bits)
    if (b != 1 && b != -1) throw DomainError(std::string(where) + ": entries must be +1 or -1");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Parity task

/// n-th order parity of a window: the product of its n bits.
inline int parity(std::span<const int> window) {
  if (window.empty()) throw ParameterError("parity: empty window");
  detail::require_bits(window, "parity");
  int p = 1;
  for (int b : window) p *= b;
  return p;
}

/// Number of +1 entries, i.e. the l of the equivalence set L_n(l).
inline int equivalence_class(std::span<const int> window) {
  detail::require_bits(window, "equivalence_class");
  int ones = 0;
  for (int b : window) ones += b == 1;
  return ones;
}

inline BitSeries random_bits(std::size_t length, std::uint64_t seed) {
  if (length < 1) throw ParameterError("random_bits: length must be >= 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  BitSeries s;
  s.bits.resize(length);
  for (auto& b : s.bits) b = coin(rng) ? 1 : -1;
  return s;
}

/// Index of an n-bit pattern: oldest bit is the most significant, +1 -> 1.
inline std::uint64_t pattern_index(std::span<const int> window) {
  std::uint64_t idx = 0;
  for (int b : window) idx = (idx << 1) | (b == 1 ? 1u : 0u);
  return idx;
}

struct Coverage {
  bool complete = false;
  std::vector<long> counts;  ///< indexed by pattern_index
};

/// Slides an n-bit window with stride one and counts every pattern.
inline Coverage coverage_check(const BitSeries& series, int n) {
  if (n < 1 || n > 30) throw ParameterError("coverage_check: n must lie in [1, 30]");
  if (static_cast<std::size_t>(n) > series.size())
    throw ParameterError("coverage_check: n exceeds the series length");
  detail::require_bits(series.bits, "coverage_check");

  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  Coverage c;
  c.counts.assign(std::size_t{1} << n, 0);
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    idx = ((idx << 1) | (series.bits[i] == 1 ? 1u : 0u)) & mask;
    if (i + 1 >= static_cast<std::size_t>(n)) ++c.counts[idx];
  }
  c.complete = std::all_of(c.counts.begin(), c.counts.end(), [](long v) { return v > 0; });
  return c;
}

/// Expected draws to collect all 2^n patterns, 2^n H_{2^n} (smallest terms summed first).
inline double coupon_expectation(int n) {
  if (n < 1 || n > 40) throw ParameterError("coupon_expectation: n must lie in [1, 40]");
  const double m = std::ldexp(1.0, n);
  const auto count = static_cast<std::uint64_t>(1) << n;
  double harmonic = 0.0;
  for (std::uint64_t i = count; i >= 1; --i) harmonic += 1.0 / static_cast<double>(i);
  return m * harmonic;
}

/// Largest minority-bit count of an n-bit word.
inline int s_max(int n) { return n / 2; }

/// n copies of -1 followed by s_max copies of +1; its n-windows visit the
/// classes l = 0, 1, ..., s_max once each.
inline BitSeries minimal_training_bits(int n) {
  if (n < 1) throw ParameterError("minimal_training_bits: n must be >= 1");
  BitSeries s;
  s.bits.assign(static_cast<std::size_t>(n), -1);
  s.bits.insert(s.bits.end(), static_cast<std::size_t>(s_max(n)), 1);
  return s;
}

/// Linearized binary de Bruijn sequence B(2, n): 2^n + n - 1 bits whose
/// n-windows are all 2^n patterns exactly once.
inline BitSeries exhaustive_bits(int n) {
  if (n < 1 || n > 26) throw ParameterError("exhaustive_bits: n must lie in [1, 26]");
  // Fredricksen-Kessler-Maiorana: concatenate, in lexicographic order, the
  // Lyndon words whose length divides n (Duval's iterative generation).
  std::vector<int> seq;
  seq.reserve((std::size_t{1} << n) + static_cast<std::size_t>(n));
  std::vector<int> w{-1};
  while (!w.empty()) {
    ++w.back();
    const std::size_t m = w.size();
    if (static_cast<std::size_t>(n) % m == 0) seq.insert(seq.end(), w.begin(), w.end());
    while (w.size() < static_cast<std::size_t>(n)) w.push_back(w[w.size() - m]);
    while (!w.empty() && w.back() == 1) w.pop_back();
  }
  for (int j = 0; j < n - 1; ++j) seq.push_back(seq[static_cast<std::size_t>(j)]);
  BitSeries s;
  s.bits.reserve(seq.size());
  for (int b : seq) s.bits.push_back(b == 1 ? 1 : -1);
  return s;
}

/// The n most recent bits ending at `word_index`, newest first.
inline std::vector<int> tapped_delay(const BitSeries& series, int n, std::size_t word_index) {
  if (n < 1) throw ParameterError("tapped_delay: n must be >= 1");
  if (word_index + 1 < static_cast<std::size_t>(n))
    throw ParameterError("tapped_delay: insufficient history for word " +
                         std::to_string(word_index));
  if (word_index >= series.size()) throw ParameterError("tapped_delay: word index out of range");
  std::vector<int> word(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) word[static_cast<std::size_t>(i)] = series.bits[word_index - i];
  return word;
}

// ---------------------------------------------------------------------------
// Lorenz '63

using Vec3 = Eigen::Vector3d;

/// Standard-parameter Lorenz '63 vector field.
inline Vec3 lorenz_derivative(const Vec3& s) {
  return {10.0 * (s.y() - s.x()), s.x() * (28.0 - s.z()) - s.y(),
          s.x() * s.y() - (8.0 / 3.0) * s.z()};
}

inline Vec3 rk4_step(const Vec3& s, double dt) {
  const Vec3 k1 = lorenz_derivative(s);
  const Vec3 k2 = lorenz_derivative(s + (0.5 * dt) * k1);
  const Vec3 k3 = lorenz_derivative(s + (0.5 * dt) * k2);
  const Vec3 k4 = lorenz_derivative(s + dt * k3);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

/// RK4 trajectory; row 0 is x0, row i the state after i steps.
inline Matrix integrate_lorenz(const Vec3& x0, double dt, long n_steps) {
  if (!(dt > 0.0)) throw ParameterError("integrate_lorenz: dt must be > 0");
  if (n_steps < 0) throw ParameterError("integrate_lorenz: n_steps must be >= 0");
  Matrix out(n_steps + 1, 3);
  Vec3 s = x0;
  out.row(0) = s.transpose();
  for (long i = 1; i <= n_steps; ++i) {
    s = rk4_step(s, dt);
    if (!s.allFinite()) throw DivergenceError(i, "integrate_lorenz");
    out.row(i) = s.transpose();
  }
  return out;
}

/// Uniformly sampled Lorenz data for inferring z from (x, y).
struct LorenzDataset {
  Vector times;   ///< S, spacing sample_dt
  Matrix xyz;     ///< S x 3
  Matrix input;   ///< S x 2, [x, y] or [x^2, y^2]
  Vector target;  ///< S, z
  double sample_dt = 0.005;
  bool square_input = false;
  std::uint64_t seed = 0;

  Eigen::Index samples() const { return target.size(); }
};

struct LorenzSampling {
  double sample_dt = 0.005;
  double internal_dt = 1e-4;
  double transient = 10.0;  ///< discarded before the first sample
};

/// Integrates from a seeded point in [-10, 10]^3, drops the transient and
/// keeps one state every sample_dt.
inline LorenzDataset make_inference_dataset(double duration, bool square_input,
                                            std::uint64_t seed, const LorenzSampling& opt = {}) {
  if (!(duration > 0.0)) throw ParameterError("make_inference_dataset: duration must be > 0");
  if (!(opt.sample_dt > 0.0) || !(opt.internal_dt > 0.0))
    throw ParameterError("make_inference_dataset: time steps must be > 0");
  const double ratio = opt.sample_dt / opt.internal_dt;
  const long stride = std::lround(ratio);
  if (stride < 1 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
    throw ParameterError("make_inference_dataset: sample_dt must be a multiple of internal_dt");
  const long samples = std::lround(duration / opt.sample_dt);
  if (samples < 1) throw ParameterError("make_inference_dataset: duration shorter than one sample");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> start(-10.0, 10.0);
  Vec3 s;
  for (int i = 0; i < 3; ++i) s[i] = start(rng);

  long step = 0;
  const long transient_steps = std::lround(opt.transient / opt.internal_dt);
  for (long i = 0; i < transient_steps; ++i) {
    s = rk4_step(s, opt.internal_dt);
    ++step;
    if (!s.allFinite()) throw DivergenceError(step, "make_inference_dataset");
  }

  LorenzDataset d;
  d.sample_dt = opt.sample_dt;
  d.square_input = square_input;
  d.seed = seed;
  d.times.resize(samples);
  d.xyz.resize(samples, 3);
  for (long k = 0; k < samples; ++k) {
    if (k > 0) {
      for (long i = 0; i < stride; ++i) {
        s = rk4_step(s, opt.internal_dt);
        ++step;
      }
      if (!s.allFinite()) throw DivergenceError(step, "make_inference_dataset");
    }
    d.times[k] = static_cast<double>(k) * opt.sample_dt;
    d.xyz.row(k) = s.transpose();
  }
  d.input = d.xyz.leftCols(2);
  if (square_input) d.input = d.input.array().square().matrix();
  d.target = d.xyz.col(2);
  return d;
}

}  // namespace symrc
