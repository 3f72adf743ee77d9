#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"
#include "symrc/types.hpp"

namespace symrc {

// ---------------------------------------------------------------------------
// Search space

struct ParamBound {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
};

/// Box over a subset of {t0, delta_t, gamma, rho_r, rho_in, sigma}, searched on a
/// linear scale. When both t0 and delta_t are present, points must satisfy
/// t0 + delta_t <= 1 (one bit period).
struct SearchSpace {
  std::vector<ParamBound> bounds;

  std::size_t dims() const { return bounds.size(); }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < bounds.size(); ++i)
      if (bounds[i].name == name) return static_cast<int>(i);
    return -1;
  }

  bool has_window() const { return index_of("t0") >= 0 && index_of("delta_t") >= 0; }

  void validate() const {
    if (bounds.empty()) throw ParameterError("SearchSpace: no parameters");
    for (const auto& b : bounds)
      if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || !(b.lower < b.upper))
        throw ParameterError("SearchSpace: bad bounds for " + b.name);
  }

  std::vector<double> to_physical(std::span<const double> unit) const {
    std::vector<double> p(bounds.size());
    for (std::size_t i = 0; i < bounds.size(); ++i)
      p[i] = bounds[i].lower + unit[i] * (bounds[i].upper - bounds[i].lower);
    return p;
  }

  bool feasible(std::span<const double> physical) const {
    for (std::size_t i = 0; i < bounds.size(); ++i)
      if (physical[i] < bounds[i].lower || physical[i] > bounds[i].upper) return false;
    if (has_window())
      return physical[static_cast<std::size_t>(index_of("t0"))] +
                 physical[static_cast<std::size_t>(index_of("delta_t"))] <=
             1.0;
    return true;
  }

  // Search ranges for the three experiments.
  static SearchSpace serial_parity() {
    return {{{"t0", 0.0, 0.5},
             {"delta_t", 0.05, 0.5},
             {"gamma", 0.1, 5.0},
             {"rho_r", 0.1, 2.0},
             {"rho_in", 0.1, 1.0},
             {"sigma", 0.1, 1.0}}};
  }
  static SearchSpace parallel_parity() {
    return {{{"t0", 0.0, 1.0},
             {"delta_t", 0.05, 1.0},
             {"gamma", 0.1, 10.0},
             {"rho_r", 0.1, 10.0},
             {"rho_in", 0.1, 1.0},
             {"sigma", 0.1, 1.0}}};
  }
  static SearchSpace inference() {
    return {{{"gamma", 0.01, 20.0},
             {"rho_r", 0.001, 5.0},
             {"rho_in", 0.001, 1.0},
             {"sigma", 0.01, 1.0}}};
  }
};

/// Writes named values into the matching HyperParams fields.
inline HyperParams apply_params(HyperParams p, const SearchSpace& space,
                                std::span<const double> values) {
  for (std::size_t i = 0; i < space.dims(); ++i) {
    const auto& name = space.bounds[i].name;
    const double v = values[i];
    if (name == "t0") p.t0 = v;
    else if (name == "delta_t") p.delta_t = v;
    else if (name == "gamma") p.gamma = v;
    else if (name == "rho_r") p.rho_r = v;
    else if (name == "rho_in") p.rho_in = v;
    else if (name == "sigma") p.sigma = v;
    else throw ParameterError("apply_params: unknown parameter " + name);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Gaussian-process surrogate

/// Zero-mean GP on standardized targets with an ARD Matern-5/2 kernel.
///
/// Length scales and signal variance maximize the log marginal likelihood
/// (Nelder-Mead over log parameters, warm start plus random restarts).
class GaussianProcess {
 public:
  explicit GaussianProcess(double nugget = 1e-6) : nugget_(nugget) {}

  /// `x` holds one unit-cube point per row.
  void fit(const Matrix& x, const Vector& y, std::mt19937_64& rng, int restarts = 2) {
    if (x.rows() != y.size() || x.rows() < 1) throw ShapeError("GaussianProcess: bad data");
    x_ = x;
    sq_diffs_.clear();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const Vector c = x.col(j);
      sq_diffs_.push_back((c.replicate(1, c.size()) - c.transpose().replicate(c.size(), 1)).array().square().matrix());
    }
    y_mean_ = y.mean();
    const double sd = std::sqrt((y.array() - y_mean_).square().mean());
    y_scale_ = sd > 0.0 ? sd : 1.0;
    ys_ = (y.array() - y_mean_) / y_scale_;

    const auto d = x.cols();
    if (theta_.size() != d + 1) theta_ = Vector::Constant(d + 1, std::log(0.3));

    Vector best = theta_;
    double best_nll = neg_log_likelihood(best);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r <= restarts; ++r) {
      Vector start = best;
      if (r > 0) {
        for (Eigen::Index i = 0; i < d; ++i)
          start[i] = kLogScaleLo + u(rng) * (kLogScaleHi - kLogScaleLo);
        start[d] = std::log(0.1) + u(rng) * (std::log(10.0) - std::log(0.1));
      }
      double nll = 0.0;
      Vector t = minimize(start, nll);
      if (nll < best_nll) {
        best_nll = nll;
        best = t;
      }
    }
    theta_ = best;
    factorize(theta_);
  }

  /// Posterior mean and standard deviation in the original target units.
  std::pair<double, double> predict(const Vector& x) const {
    const auto n = x_.rows();
    const auto d = x_.cols();
    Vector k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double r2 = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double z = (x[j] - x_(i, j)) * inv_scale_[j];
        r2 += z * z;
      }
      k[i] = matern(r2, signal_var());
    }
    const double mean = k.dot(alpha_);
    const Vector v = llt_.matrixL().solve(k);
    const double var = std::max(signal_var() - v.squaredNorm(), 1e-18);
    return {y_mean_ + y_scale_ * mean, y_scale_ * std::sqrt(var)};
  }

  const Vector& log_params() const { return theta_; }
  double y_mean() const { return y_mean_; }
  double y_scale() const { return y_scale_; }

 private:
  static constexpr double kLogScaleLo = -4.605170185988091;  // log 0.01
  static constexpr double kLogScaleHi = 4.605170185988091;   // log 100
  static constexpr double kLogVarLo = -4.605170185988091;
  static constexpr double kLogVarHi = 6.907755278982137;     // log 1000

  double signal_var() const { return std::exp(theta_[theta_.size() - 1]); }

  // s2 * Matern-5/2 as a function of the squared scaled distance.
  static double matern(double r2, double s2) {
    const double r = std::sqrt(5.0 * r2);
    return s2 * (1.0 + r + r * r / 3.0) * std::exp(-r);
  }

  Vector clamp(Vector t) const {
    const auto d = t.size() - 1;
    for (Eigen::Index i = 0; i < d; ++i) t[i] = std::clamp(t[i], kLogScaleLo, kLogScaleHi);
    t[d] = std::clamp(t[d], kLogVarLo, kLogVarHi);
    return t;
  }

  bool factorize(const Vector& theta) {
    const auto n = x_.rows();
    const auto d = x_.cols();
    inv_scale_ = (-theta.head(d)).array().exp();
    Matrix r2 = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < d; ++j) r2 += sq_diffs_[static_cast<std::size_t>(j)] * (inv_scale_[j] * inv_scale_[j]);
    const double s2 = std::exp(theta[d]);
    Matrix k = r2.unaryExpr([s2](double v) { return matern(v, s2); });
    k.diagonal().array() += nugget_;
    llt_.compute(k);
    if (llt_.info() != Eigen::Success) return false;
    alpha_ = llt_.solve(ys_);
    return true;
  }

  double neg_log_likelihood(const Vector& theta) {
    if (!factorize(theta)) return std::numeric_limits<double>::infinity();
    const double logdet = llt_.matrixLLT().diagonal().array().log().sum();
    return 0.5 * ys_.dot(alpha_) + logdet +
           0.5 * static_cast<double>(ys_.size()) * std::log(2.0 * std::numbers::pi);
  }

  // Nelder-Mead on the clamped log-parameter box.
  Vector minimize(const Vector& start, double& value) {
    const auto n = start.size();
    std::vector<Vector> simplex;
    std::vector<double> f;
    simplex.push_back(clamp(start));
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector v = simplex[0];
      v[i] += 0.5;
      simplex.push_back(clamp(v));
    }
    auto eval = [&](const Vector& t) { return neg_log_likelihood(t); };
    for (const auto& s : simplex) f.push_back(eval(s));

    constexpr int kMaxEvals = 160;
    int evals = static_cast<int>(f.size());
    std::vector<std::size_t> order(simplex.size());
    while (evals < kMaxEvals) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
      const std::size_t lo = order.front(), hi = order.back(), second = order[order.size() - 2];
      if (std::abs(f[hi] - f[lo]) < 1e-7 * (1.0 + std::abs(f[lo]))) break;

      Vector centroid = Vector::Zero(n);
      for (std::size_t i = 0; i < simplex.size(); ++i)
        if (i != hi) centroid += simplex[i];
      centroid /= static_cast<double>(n);

      const Vector reflected = clamp(centroid + (centroid - simplex[hi]));
      const double fr = eval(reflected);
      ++evals;
      if (fr < f[lo]) {
        const Vector expanded = clamp(centroid + 2.0 * (centroid - simplex[hi]));
        const double fe = eval(expanded);
        ++evals;
        if (fe < fr) {
          simplex[hi] = expanded;
          f[hi] = fe;
        } else {
          simplex[hi] = reflected;
          f[hi] = fr;
        }
      } else if (fr < f[second]) {
        simplex[hi] = reflected;
        f[hi] = fr;
      } else {
        const Vector contracted = clamp(centroid + 0.5 * (simplex[hi] - centroid));
        const double fc = eval(contracted);
        ++evals;
        if (fc < f[hi]) {
          simplex[hi] = contracted;
          f[hi] = fc;
        } else {
          for (std::size_t i = 0; i < simplex.size(); ++i) {
            if (i == lo) continue;
            simplex[i] = clamp(simplex[lo] + 0.5 * (simplex[i] - simplex[lo]));
            f[i] = eval(simplex[i]);
            ++evals;
          }
        }
      }
    }
    const auto best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    value = f[best];
    return simplex[best];
  }

  double nugget_;
  Matrix x_;
  Vector ys_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Vector theta_;
  Vector inv_scale_;
  std::vector<Matrix> sq_diffs_;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
};

/// Expected improvement below `best` for a Gaussian prediction (mean, sd).
inline double expected_improvement(double mean, double sd, double best, double xi) {
  if (!(sd > 1e-12)) return std::max(best - xi - mean, 0.0);
  const double imp = best - xi - mean;
  const double z = imp / sd;
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  return imp * cdf + sd * pdf;
}

// ---------------------------------------------------------------------------
// Optimizer

/// What to record for an evaluation whose objective is non-finite or throws.
struct PenaltyPolicy {
  enum class Kind { fixed, worst_multiple } kind = Kind::fixed;
  double value = 1.0;  ///< the fixed value, or the multiple of the running worst

  static PenaltyPolicy fixed_value(double v) { return {Kind::fixed, v}; }
  static PenaltyPolicy multiple_of_worst(double m) { return {Kind::worst_multiple, m}; }
};

struct OptimizerOptions {
  int budget = 60;
  int initial_points = 10;
  int candidates = 1000;
  double nugget = 1e-6;
  double xi = 0.01;  ///< EI exploration margin, in standardized units
  int restarts = 2;  ///< random restarts of the likelihood search per refit
  PenaltyPolicy penalty{};
  /// Stop early once an objective value <= stop_at is seen (e.g. 0 for BER).
  double stop_at = -std::numeric_limits<double>::infinity();
};

struct OptimizationTrace {
  std::vector<std::string> names;
  std::vector<std::vector<double>> points;  ///< physical parameter values
  std::vector<double> values;               ///< recorded objective (penalty if failed)
  std::vector<bool> penalized;
  std::vector<double> best_so_far;
  std::size_t best_index = 0;
  std::uint64_t seed = 0;
  int budget_used = 0;
};

struct OptimizationResult {
  std::vector<double> best;
  double best_value = std::numeric_limits<double>::infinity();
  OptimizationTrace trace;
};

using Objective = std::function<double(std::span<const double>)>;

namespace detail {

// Latin hypercube in the unit cube; infeasible rows are replaced by uniform
// feasible draws.
inline std::vector<Vector> initial_design(const SearchSpace& space, int count,
                                          std::mt19937_64& rng) {
  const auto d = static_cast<Eigen::Index>(space.dims());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vector> pts(static_cast<std::size_t>(count), Vector(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<int> strata(static_cast<std::size_t>(count));
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    for (int i = 0; i < count; ++i)
      pts[static_cast<std::size_t>(i)][j] =
          (strata[static_cast<std::size_t>(i)] + u(rng)) / static_cast<double>(count);
  }
  for (auto& p : pts) {
    int tries = 0;
    while (!space.feasible(space.to_physical({p.data(), static_cast<std::size_t>(d)}))) {
      if (++tries > 10000) throw ParameterError("optimize: search space has no feasible points");
      for (Eigen::Index j = 0; j < d; ++j) p[j] = u(rng);
    }
  }
  return pts;
}

inline bool unit_feasible(const SearchSpace& space, const Vector& x) {
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x[i] < 0.0 || x[i] > 1.0) return false;
  return space.feasible(space.to_physical({x.data(), static_cast<std::size_t>(x.size())}));
}

}  // namespace detail

/// GP/EI Bayesian minimization of `objective` over `space`.
///
/// The first `initial_points` evaluations come from a Latin hypercube, the rest
/// maximize expected improvement over `candidates` random feasible points
/// followed by a compass search around the best one.
inline OptimizationResult optimize(const Objective& objective, const SearchSpace& space,
                                   const OptimizerOptions& opt, std::uint64_t seed) {
  space.validate();
  if (opt.initial_points < 1) throw ParameterError("optimize: initial_points must be >= 1");
  if (opt.budget < opt.initial_points)
    throw ParameterError("optimize: budget is smaller than the initial design");

  std::mt19937_64 rng(seed);
  const auto d = static_cast<Eigen::Index>(space.dims());

  OptimizationResult res;
  auto& trace = res.trace;
  trace.seed = seed;
  for (const auto& b : space.bounds) trace.names.push_back(b.name);

  std::vector<Vector> unit_points;
  double worst = -std::numeric_limits<double>::infinity();

  auto evaluate = [&](const Vector& x) {
    const auto phys = space.to_physical({x.data(), static_cast<std::size_t>(d)});
    double v;
    try {
      v = objective(phys);
    } catch (const std::exception&) {
      v = std::numeric_limits<double>::quiet_NaN();
    }
    const bool failed = !std::isfinite(v);
    if (failed) {
      v = opt.penalty.kind == PenaltyPolicy::Kind::fixed
              ? opt.penalty.value
              : opt.penalty.value * std::max(1.0, std::isfinite(worst) ? std::abs(worst) : 1.0);
    } else {
      worst = std::max(worst, v);
    }
    unit_points.push_back(x);
    trace.points.push_back(phys);
    trace.values.push_back(v);
    trace.penalized.push_back(failed);
    if (trace.values.size() == 1 || v < trace.values[trace.best_index])
      trace.best_index = trace.values.size() - 1;
    trace.best_so_far.push_back(trace.values[trace.best_index]);
    trace.budget_used = static_cast<int>(trace.values.size());
    return v;
  };
  auto done = [&] { return trace.best_so_far.back() <= opt.stop_at; };

  for (const auto& x : detail::initial_design(space, opt.initial_points, rng)) {
    evaluate(x);
    if (done()) break;
  }

  GaussianProcess gp(opt.nugget);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (!done() && trace.budget_used < opt.budget) {
    Matrix x(static_cast<Eigen::Index>(unit_points.size()), d);
    for (std::size_t i = 0; i < unit_points.size(); ++i)
      x.row(static_cast<Eigen::Index>(i)) = unit_points[i].transpose();
    const Vector y = Eigen::Map<const Vector>(trace.values.data(),
                                              static_cast<Eigen::Index>(trace.values.size()));
    gp.fit(x, y, rng, opt.restarts);
    const double best_std = (trace.values[trace.best_index] - gp.y_mean()) / gp.y_scale();
    auto acquisition = [&](const Vector& c) {
      auto [m, s] = gp.predict(c);
      return expected_improvement((m - gp.y_mean()) / gp.y_scale(), s / gp.y_scale(), best_std,
                                  opt.xi);
    };

    Vector best_c(d);
    double best_ei = -1.0;
    for (int i = 0, tries = 0; i < opt.candidates && tries < 100 * opt.candidates; ++tries) {
      Vector c(d);
      for (Eigen::Index j = 0; j < d; ++j) c[j] = u(rng);
      if (!detail::unit_feasible(space, c)) continue;
      ++i;
      const double ei = acquisition(c);
      if (ei > best_ei) {
        best_ei = ei;
        best_c = c;
      }
    }
    if (best_ei < 0.0) throw ParameterError("optimize: no feasible candidate found");

    // Compass search refinement of the acquisition.
    for (double step = 0.05; step > 1e-3; step *= 0.5) {
      bool improved = true;
      for (int sweep = 0; improved && sweep < 20; ++sweep) {
        improved = false;
        for (Eigen::Index j = 0; j < d; ++j) {
          for (double dir : {-1.0, 1.0}) {
            Vector c = best_c;
            c[j] = std::clamp(c[j] + dir * step, 0.0, 1.0);
            if (!detail::unit_feasible(space, c)) continue;
            const double ei = acquisition(c);
            if (ei > best_ei) {
              best_ei = ei;
              best_c = c;
              improved = true;
            }
          }
        }
      }
    }

    // Re-proposing an evaluated point adds nothing; explore instead.
    for (const auto& p : unit_points) {
      if ((p - best_c).norm() < 1e-9) {
        do {
          for (Eigen::Index j = 0; j < d; ++j) best_c[j] = u(rng);
        } while (!detail::unit_feasible(space, best_c));
        break;
      }
    }
    evaluate(best_c);
  }

  res.best = trace.points[trace.best_index];
  res.best_value = trace.values[trace.best_index];
  return res;
}

}  // namespace symrc
