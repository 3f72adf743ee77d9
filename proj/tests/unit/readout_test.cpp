#include <gtest/gtest.h>

#include <random>

#include "symrc/readout.hpp"

namespace symrc {
namespace {

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = z(rng);
  return m;
}

// Least squares on the stacked system [G; sqrt(a) I] W^T = [Y; 0] via
// Householder QR. Never forms G^T G.
Matrix qr_ridge(const Matrix& g, const Matrix& y, double alpha) {
  const Eigen::Index s = g.rows(), n = g.cols();
  Matrix a(s + n, n);
  a.topRows(s) = g;
  a.bottomRows(n) = std::sqrt(alpha) * Matrix::Identity(n, n);
  Matrix b = Matrix::Zero(s + n, y.cols());
  b.topRows(s) = y;
  return a.householderQr().solve(b).transpose();
}

double objective(const Matrix& g, const Matrix& y, const Matrix& w, double alpha) {
  return (y - g * w.transpose()).squaredNorm() + alpha * w.squaredNorm();
}

TEST(FeatureMap, SquaresEverythingAtOne) {
  EXPECT_EQ(feature_map(Vector{{2.0, -3.0}}, 1.0), (Vector{{4.0, 9.0}}));
}

TEST(FeatureMap, IdentityAtZero) {
  EXPECT_EQ(feature_map(Vector{{2.0, -3.0}}, 0.0), (Vector{{2.0, -3.0}}));
}

TEST(FeatureMap, SquaresLeadingBlock) {
  EXPECT_EQ(feature_map(Vector{{1.0, -2.0, 3.0, -4.0}}, 0.5), (Vector{{1.0, 4.0, 3.0, -4.0}}));
}

TEST(FeatureMap, RowsMatchSingleVectorForm) {
  std::mt19937_64 rng(3);
  const Matrix states = random_matrix(7, 9, rng);
  for (double eta : {0.0, 0.2, 0.5, 1.0}) {
    const Matrix rows = feature_map_rows(states, eta);
    for (Eigen::Index i = 0; i < states.rows(); ++i)
      EXPECT_EQ(rows.row(i).transpose(), feature_map(states.row(i).transpose(), eta));
  }
}

TEST(FeatureMap, EvenWhenFullySquared) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const Vector r = random_matrix(25, 1, rng);
    EXPECT_EQ(feature_map(-r, 1.0), feature_map(r, 1.0));
  }
}

TEST(TrainRidge, IdentityFeaturesGiveTargetsExactly) {
  std::mt19937_64 rng(1);
  const Matrix y = random_matrix(6, 2, rng);
  const auto w = train_ridge(Matrix::Identity(6, 6), y, 0.0);
  EXPECT_EQ(w.w_out, y.transpose());
  EXPECT_EQ(w.training_sample_count, 6);
  EXPECT_EQ(w.alpha_used, 0.0);
  EXPECT_FALSE(w.has_intercept());
}

TEST(TrainRidge, LargeAlphaShrinksWeights) {
  std::mt19937_64 rng(2);
  const Matrix g = random_matrix(40, 10, rng);
  const Matrix y = random_matrix(40, 2, rng);
  const double small = train_ridge(g, y, 0.01).w_out.norm();
  const double big = train_ridge(g, y, 1e9).w_out.norm();
  EXPECT_LT(big, 1e-6 * small);
}

TEST(TrainRidge, MatchesQrOracle) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix g = random_matrix(40, 10, rng);
    const Matrix y = random_matrix(40, 2, rng);
    const Matrix expected = qr_ridge(g, y, 0.1);
    const Matrix got = train_ridge(g, y, 0.1).w_out;
    EXPECT_LT((got - expected).norm() / expected.norm(), 1e-8) << "trial " << trial;
  }
}

TEST(TrainRidge, SingularWithoutRegularizationThrows) {
  Matrix g = Matrix::Zero(5, 3);
  g.col(0).setOnes();
  g.col(1).setOnes();
  EXPECT_THROW(train_ridge(g, Matrix::Ones(5, 1), 0.0), SolverError);
  EXPECT_NO_THROW(train_ridge(g, Matrix::Ones(5, 1), 1e-3));
}

TEST(TrainRidge, ShapeAndParameterErrors) {
  EXPECT_THROW(train_ridge(Matrix(4, 2), Matrix(3, 1), 0.1), ShapeError);
  EXPECT_THROW(train_ridge(Matrix(0, 2), Matrix(0, 1), 0.1), ShapeError);
  EXPECT_THROW(train_ridge(Matrix::Ones(3, 2), Matrix::Ones(3, 1), -1.0), ParameterError);
}

TEST(TrainRidge, PerturbingAnyEntryNeverHelps) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix g = random_matrix(30, 6, rng);
    const Matrix y = random_matrix(30, 2, rng);
    const double alpha = 0.05;
    const Matrix w = train_ridge(g, y, alpha).w_out;
    const double best = objective(g, y, w, alpha);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      for (double h : {1e-4, -1e-4}) {
        Matrix p = w;
        p.data()[i] += h;
        EXPECT_GE(objective(g, y, p, alpha), best);
      }
    }
  }
}

TEST(TrainRidge, GradientVanishes) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix g = random_matrix(60, 15, rng);
    const Matrix y = random_matrix(60, 3, rng);
    const double alpha = 1e-3;
    const Matrix wt = train_ridge(g, y, alpha).w_out.transpose();
    const Matrix grad = g.transpose() * g * wt + alpha * wt - g.transpose() * y;
    EXPECT_LT(grad.norm(), 1e-8 * (g.transpose() * y).norm());
  }
}

TEST(TrainRidge, InterceptIsUnpenalized) {
  // Constant targets: the intercept should carry them even under heavy ridge.
  std::mt19937_64 rng(4);
  const Matrix g = random_matrix(50, 4, rng);
  const Matrix y = Matrix::Constant(50, 1, 3.0);
  const auto w = train_ridge(g, y, 1e6, true);
  ASSERT_TRUE(w.has_intercept());
  EXPECT_NEAR(w.intercept[0], 3.0, 1e-3);
  EXPECT_LT(w.w_out.norm(), 1e-3);
}

TEST(TrainRidge, InterceptMatchesAugmentedOracle) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix g = random_matrix(40, 8, rng);
    const Matrix y = random_matrix(40, 2, rng);
    const double alpha = 0.2;
    // Oracle: extra unit column with zero penalty row.
    Matrix a = Matrix::Zero(48, 9);
    a.topLeftCorner(40, 8) = g;
    a.topRightCorner(40, 1).setOnes();
    a.bottomLeftCorner(8, 8) = std::sqrt(alpha) * Matrix::Identity(8, 8);
    Matrix b = Matrix::Zero(48, 2);
    b.topRows(40) = y;
    const Matrix sol = a.householderQr().solve(b);
    const auto w = train_ridge(g, y, alpha, true);
    EXPECT_LT((w.w_out - sol.topRows(8).transpose()).norm(), 1e-9);
    EXPECT_LT((w.intercept - sol.row(8).transpose()).norm(), 1e-9);
  }
}

TEST(Predict, ZeroWeightsGiveZero) {
  ReadoutWeights w;
  w.w_out = Matrix::Zero(2, 3);
  EXPECT_EQ(predict(w, Matrix::Ones(4, 3)), Matrix::Zero(4, 2));
}

TEST(Predict, OnesSumFeatures) {
  ReadoutWeights w;
  w.w_out = Matrix::Ones(1, 7);
  EXPECT_EQ(predict(w, Matrix::Ones(1, 7))(0, 0), 7.0);
  EXPECT_EQ(predict_one(w, Vector::Ones(7))[0], 7.0);
}

TEST(Predict, InterpolatesSquareSystem) {
  std::mt19937_64 rng(13);
  const Matrix g = random_matrix(8, 8, rng);
  const Matrix y = random_matrix(8, 2, rng);
  const auto w = train_ridge(g, y, 0.0);
  EXPECT_LT((predict(w, g) - y).norm(), 1e-9 * y.norm());
}

TEST(Predict, AddsIntercept) {
  ReadoutWeights w;
  w.w_out = Matrix::Zero(2, 3);
  w.intercept = Vector{{1.5, -2.0}};
  const Matrix v = predict(w, Matrix::Ones(3, 3));
  EXPECT_EQ(v.col(0), Vector::Constant(3, 1.5));
  EXPECT_EQ(v.col(1), Vector::Constant(3, -2.0));
}

TEST(Predict, ShapeMismatch) {
  ReadoutWeights w;
  w.w_out = Matrix::Zero(1, 3);
  EXPECT_THROW(predict(w, Matrix(2, 4)), ShapeError);
  EXPECT_THROW(predict_one(w, Vector(2)), ShapeError);
}

}  // namespace
}  // namespace symrc
