#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"
#include "symrc/types.hpp"

namespace symrc {

/// Instantiated continuous-time echo state network.
///
/// Integrates  dr/dt = -gamma r + gamma f(W_r r + W_in u + b)  with forward Euler.
/// The machine owns a scratch buffer, so one instance must not be stepped from
/// two threads at once; distinct instances are independent.
struct ReservoirMachine {
  int n_nodes = 0;
  Matrix w_in;      ///< N x d
  SparseMatrix w_r; ///< N x N, k nonzeros per row
  Vector state;     ///< r
  HyperParams params;
  std::uint64_t seed = 0;

  int input_dim() const { return static_cast<int>(w_in.cols()); }

  // Reused pre-activation buffer.
  Vector scratch;
};

/// Saved states with the (1-based) integration step at which each was recorded.
struct StateTrajectory {
  Matrix states;  ///< S x N
  std::vector<long> step_indices;
};

/// Largest eigenvalue modulus of a square matrix, via a dense eigensolver.
inline double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("spectral_radius: matrix is not square");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw SolverError("spectral_radius: eigensolver failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

namespace detail {

// Independent streams for W_in and W_r so that changing k does not disturb the
// input weights of an instance (and vice versa).
inline std::mt19937_64 stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

// Every entry consumes one normal and one uniform draw whatever sigma is, so
// one seed gives one topology and sigma/rho_in only rescale or mask it.
inline Matrix draw_input_weights(int n_nodes, int input_dim, double rho_in, double sigma,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double scale = std::sqrt(rho_in);
  Matrix w(n_nodes, input_dim);
  for (int i = 0; i < n_nodes; ++i) {
    for (int j = 0; j < input_dim; ++j) {
      const double z = normal(rng);
      const double keep = uniform(rng);
      w(i, j) = keep < sigma ? scale * z : 0.0;
    }
  }
  return w;
}

inline SparseMatrix draw_recurrent_weights(int n_nodes, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(static_cast<std::size_t>(n_nodes) * static_cast<std::size_t>(k));
  std::vector<int> others(static_cast<std::size_t>(std::max(0, n_nodes - 1)));
  for (int i = 0; i < n_nodes; ++i) {
    // Sources are every node except i; partial Fisher-Yates picks k of them.
    std::iota(others.begin(), others.end(), 0);
    for (int& o : others)
      if (o >= i) ++o;
    for (int c = 0; c < k; ++c) {
      std::uniform_int_distribution<int> pick(c, n_nodes - 2);
      std::swap(others[c], others[pick(rng)]);
      entries.emplace_back(i, others[c], value(rng));
    }
  }
  SparseMatrix w(n_nodes, n_nodes);
  w.setFromTriplets(entries.begin(), entries.end());
  w.makeCompressed();
  return w;
}

}  // namespace detail

/// Draws W_in and W_r for an N-node reservoir with d inputs; state starts at zero.
inline ReservoirMachine instantiate(int n_nodes, int input_dim, const HyperParams& params,
                                   std::uint64_t seed) {
  if (n_nodes < 1) throw ParameterError("instantiate: n_nodes must be >= 1");
  if (input_dim < 1) throw ParameterError("instantiate: input_dim must be >= 1");
  if (n_nodes > 1 && params.k >= n_nodes)
    throw ParameterError("instantiate: k must be smaller than n_nodes");
  validate(params, n_nodes);

  ReservoirMachine m;
  m.n_nodes = n_nodes;
  m.params = params;
  m.seed = seed;

  auto in_rng = detail::stream(seed, 1);
  m.w_in = detail::draw_input_weights(n_nodes, input_dim, params.rho_in, params.sigma, in_rng);

  if (n_nodes == 1) {
    m.w_r = SparseMatrix(1, 1);
  } else {
    auto r_rng = detail::stream(seed, 2);
    constexpr int kMaxDraws = 16;
    for (int attempt = 0;; ++attempt) {
      SparseMatrix w = detail::draw_recurrent_weights(n_nodes, params.k, r_rng);
      const double radius = spectral_radius(Matrix(w));
      if (radius > 0.0 && std::isfinite(radius)) {
        w *= params.rho_r / radius;
        m.w_r = std::move(w);
        break;
      }
      if (attempt + 1 == kMaxDraws)
        throw SolverError("instantiate: recurrent matrix has zero spectral radius after retries");
    }
  }

  m.state = Vector::Zero(n_nodes);
  m.scratch = Vector::Zero(n_nodes);
  return m;
}

/// f(x + b) per node: tanh^2 for the first ceil(eta_f N) nodes, tanh otherwise.
inline void apply_activation(Eigen::Ref<Vector> x, double eta_f, double bias) {
  const int n = static_cast<int>(x.size());
  const int squared = leading_block(eta_f, n);
  for (int i = 0; i < n; ++i) {
    const double t = std::tanh(x[i] + bias);
    x[i] = i < squared ? t * t : t;
  }
}

inline Vector activation(const Vector& pre_activation, double eta_f, double bias) {
  Vector out = pre_activation;
  apply_activation(out, eta_f, bias);
  return out;
}

/// One Euler step with a precomputed input drive W_in u.
///
/// Fixed operation order keeps the step exactly odd when b = 0 and eta_f = 0:
/// step(-r, -drive) == -step(r, drive) bit for bit.
inline const Vector& euler_step_drive(ReservoirMachine& m, const Vector& drive, double dt,
                                      long step_index = 0) {
  const double g = m.params.gamma;
  m.scratch.noalias() = m.w_r * m.state;
  m.scratch += drive;
  apply_activation(m.scratch, m.params.eta_f, m.params.bias);
  m.state += (dt * g) * (m.scratch - m.state);
  if (!m.state.allFinite()) throw DivergenceError(step_index, "euler_step");
  return m.state;
}

/// r <- r + dt (-gamma r + gamma f(W_r r + W_in u + b)); returns the new state.
inline const Vector& euler_step(ReservoirMachine& m, const Vector& u, double dt,
                                long step_index = 0) {
  if (u.size() != m.input_dim()) throw ShapeError("euler_step: input dimension mismatch");
  if (!(dt > 0.0)) throw ParameterError("euler_step: dt must be > 0");
  const Vector drive = m.w_in * u;
  return euler_step_drive(m, drive, dt, step_index);
}

/// Drives the machine with one input row per Euler step, saving every
/// `save_every` steps (the first saved state is after step `save_every`).
inline StateTrajectory run(ReservoirMachine& m, const Matrix& inputs, int save_every, double dt) {
  if (inputs.rows() == 0) throw ParameterError("run: inputs are empty");
  if (save_every < 1) throw ParameterError("run: save_every must be >= 1");
  if (inputs.cols() != m.input_dim()) throw ShapeError("run: input dimension mismatch");
  if (!(dt > 0.0)) throw ParameterError("run: dt must be > 0");

  const long steps = inputs.rows();
  StateTrajectory out;
  out.states.resize(steps / save_every, m.n_nodes);
  out.step_indices.reserve(static_cast<std::size_t>(steps / save_every));
  Vector drive(m.n_nodes);
  for (long s = 1; s <= steps; ++s) {
    drive.noalias() = m.w_in * inputs.row(s - 1).transpose();
    euler_step_drive(m, drive, dt, s);
    if (s % save_every == 0) {
      out.states.row(static_cast<Eigen::Index>(out.step_indices.size())) = m.state.transpose();
      out.step_indices.push_back(s);
    }
  }
  return out;
}

inline void reset(ReservoirMachine& m) { m.state.setZero(); }

}  // namespace symrc
