#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "symrc/errors.hpp"

namespace symrc {

/// Tunable scalars of one reservoir instance.
///
/// Times are measured in units of the bit period T for the parity task, so
/// `gamma` is in 1/T there; for inference they are in Lorenz time units.
struct HyperParams {
  double gamma = 1.0;     ///< node decay rate
  double rho_r = 1.0;     ///< spectral radius of the recurrent matrix
  double rho_in = 0.5;    ///< variance of the input-weight normal
  double sigma = 1.0;     ///< probability that an input weight is nonzero
  int k = 1;              ///< incoming recurrent connections per node
  double bias = 0.0;      ///< b inside the activation
  double eta_f = 0.0;     ///< fraction of nodes using tanh^2
  double eta_r = 0.0;     ///< fraction of nodes squared at readout
  double alpha = 1e-6;    ///< ridge regularization
  double t0 = 0.0;        ///< measurement window start [T]
  double delta_t = 1.0;   ///< measurement window length [T]

  bool operator==(const HyperParams&) const = default;
};

/// Number of leading nodes affected by a fraction `eta` of `n` nodes: ceil(eta*n).
///
/// A relative slack of 1e-12 absorbs products like 0.3*10 = 3.0000000000000004.
inline int leading_block(double eta, int n) {
  if (eta <= 0.0 || n <= 0) return 0;
  const double scaled = eta * static_cast<double>(n);
  const int count = static_cast<int>(std::ceil(scaled - 1e-12 * std::max(1.0, scaled)));
  return std::clamp(count, 1, n);
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ParameterError(what);
}

}  // namespace detail

/// Checks the scalar invariants. `n_nodes` is used for the k bound only.
inline void validate(const HyperParams& p, int n_nodes) {
  using detail::require;
  require(std::isfinite(p.gamma) && p.gamma > 0.0, "gamma must be > 0");
  require(std::isfinite(p.rho_r) && p.rho_r > 0.0, "rho_r must be > 0");
  require(std::isfinite(p.rho_in) && p.rho_in >= 0.0, "rho_in must be >= 0");
  require(p.sigma >= 0.0 && p.sigma <= 1.0, "sigma must lie in [0, 1]");
  require(p.eta_f >= 0.0 && p.eta_f <= 1.0, "eta_f must lie in [0, 1]");
  require(p.eta_r >= 0.0 && p.eta_r <= 1.0, "eta_r must lie in [0, 1]");
  require(std::isfinite(p.alpha) && p.alpha >= 0.0, "alpha must be >= 0");
  require(std::isfinite(p.bias), "bias must be finite");
  require(n_nodes >= 1, "n_nodes must be >= 1");
  if (n_nodes == 1) {
    require(p.k == 0, "k must be 0 for a single node");
  } else {
    require(p.k >= 1 && p.k <= n_nodes - 1, "k must lie in [1, N-1]");
  }
}

/// Checks t0 >= 0, delta_t > 0 and t0 + delta_t <= 1 (one bit period).
inline void validate_window(const HyperParams& p) {
  using detail::require;
  require(p.t0 >= 0.0, "t0 must be >= 0");
  require(p.delta_t > 0.0, "delta_t must be > 0");
  require(p.t0 + p.delta_t <= 1.0 + 1e-12, "t0 + delta_t must not exceed the bit period");
}

}  // namespace symrc
