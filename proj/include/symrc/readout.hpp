#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

#include "symrc/errors.hpp"
#include "symrc/hyperparams.hpp"
#include "symrc/reservoir.hpp"

namespace symrc {

/// Feature vectors g(r) at saved sample times.
struct FeatureTrajectory {
  Matrix features;  ///< S x N
  std::vector<long> step_indices;
  std::vector<long> word_ids;  ///< empty unless samples are tagged by parity word
};

/// Trained output layer: v = W_out g + intercept.
///
/// `intercept` is empty when no constant feature was fitted.
struct ReadoutWeights {
  Matrix w_out;  ///< m x N
  Vector intercept;
  double alpha_used = 0.0;
  long training_sample_count = 0;

  bool has_intercept() const { return intercept.size() > 0; }
  int outputs() const { return static_cast<int>(w_out.rows()); }
  int features() const { return static_cast<int>(w_out.cols()); }
};

/// g(r): squares the first ceil(eta_r N) entries in place.
inline void apply_feature_map(Eigen::Ref<Vector> r, double eta_r) {
  const int squared = leading_block(eta_r, static_cast<int>(r.size()));
  for (int i = 0; i < squared; ++i) r[i] = r[i] * r[i];
}

inline Vector feature_map(const Vector& state, double eta_r) {
  Vector g = state;
  apply_feature_map(g, eta_r);
  return g;
}

/// Row-wise g over a matrix of states.
inline Matrix feature_map_rows(Matrix states, double eta_r) {
  const int squared = leading_block(eta_r, static_cast<int>(states.cols()));
  if (squared > 0) states.leftCols(squared) = states.leftCols(squared).array().square().matrix();
  return states;
}

/// Ridge regression of `targets` (S x m) on `features` (S x N).
///
/// Minimizes |Y - G W^T|^2 + alpha |W|^2 through the regularized normal
/// equations and a Cholesky factorization. With `fit_intercept`, a constant
/// unit column is appended and left unpenalized.
inline ReadoutWeights train_ridge(const Matrix& features, const Matrix& targets, double alpha,
                                  bool fit_intercept = false) {
  if (features.rows() < 1) throw ShapeError("train_ridge: no training samples");
  if (features.rows() != targets.rows())
    throw ShapeError("train_ridge: feature and target row counts differ");
  if (!(alpha >= 0.0)) throw ParameterError("train_ridge: alpha must be >= 0");

  const Eigen::Index n = features.cols();
  const Eigen::Index p = n + (fit_intercept ? 1 : 0);

  Matrix gram(p, p);
  Matrix rhs(p, targets.cols());
  gram.setZero();
  gram.topLeftCorner(n, n).selfadjointView<Eigen::Lower>().rankUpdate(features.transpose());
  rhs.topRows(n).noalias() = features.transpose() * targets;
  if (fit_intercept) {
    const Vector sums = features.colwise().sum().transpose();
    gram.block(n, 0, 1, n) = sums.transpose();
    gram(n, n) = static_cast<double>(features.rows());
    rhs.row(n) = targets.colwise().sum();
  }
  gram.diagonal().head(n).array() += alpha;

  Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success || (alpha == 0.0 && llt.rcond() < 1e-14))
    throw SolverError(alpha == 0.0
                          ? "train_ridge: normal equations are singular; use alpha > 0"
                          : "train_ridge: normal equations are not positive definite");
  const Matrix solution = llt.solve(rhs);  // p x m

  ReadoutWeights w;
  w.w_out = solution.topRows(n).transpose();
  if (fit_intercept) w.intercept = solution.row(n).transpose();
  w.alpha_used = alpha;
  w.training_sample_count = features.rows();
  return w;
}

/// Outputs V (S x m) = G W_out^T (+ intercept); no thresholding.
inline Matrix predict(const ReadoutWeights& weights, const Matrix& features) {
  if (features.cols() != weights.w_out.cols())
    throw ShapeError("predict: feature count does not match the readout");
  Matrix out = features * weights.w_out.transpose();
  if (weights.has_intercept()) out.rowwise() += weights.intercept.transpose();
  return out;
}

/// Single-row form of predict.
inline Vector predict_one(const ReadoutWeights& weights, const Vector& g) {
  if (g.size() != weights.w_out.cols())
    throw ShapeError("predict: feature count does not match the readout");
  Vector v = weights.w_out * g;
  if (weights.has_intercept()) v += weights.intercept;
  return v;
}

}  // namespace symrc
