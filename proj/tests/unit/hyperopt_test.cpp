#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "symrc/hyperopt.hpp"

namespace symrc {
namespace {

SearchSpace unit_box(int d) {
  SearchSpace s;
  for (int i = 0; i < d; ++i) s.bounds.push_back({"x" + std::to_string(i), 0.0, 1.0});
  return s;
}

double bowl(std::span<const double> p, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += (p[i] - c[i]) * (p[i] - c[i]);
  return s;
}

TEST(SearchSpace, PresetRanges) {
  const auto s = SearchSpace::serial_parity();
  ASSERT_EQ(s.dims(), 6u);
  EXPECT_EQ(s.bounds[s.index_of("gamma")].upper, 5.0);
  EXPECT_EQ(s.bounds[s.index_of("delta_t")].lower, 0.05);
  EXPECT_TRUE(s.has_window());
  const auto p = SearchSpace::parallel_parity();
  EXPECT_EQ(p.bounds[p.index_of("rho_r")].upper, 10.0);
  EXPECT_EQ(p.bounds[p.index_of("t0")].upper, 1.0);
  const auto i = SearchSpace::inference();
  EXPECT_FALSE(i.has_window());
  EXPECT_EQ(i.bounds[i.index_of("rho_r")].lower, 0.001);
  EXPECT_EQ(i.bounds[i.index_of("gamma")].upper, 20.0);
  EXPECT_EQ(i.index_of("t0"), -1);
}

TEST(SearchSpace, ValidateRejectsBadBounds) {
  SearchSpace s{{{"gamma", 1.0, 1.0}}};
  EXPECT_THROW(s.validate(), ParameterError);
  EXPECT_THROW(SearchSpace{}.validate(), ParameterError);
}

TEST(SearchSpace, ApplyParams) {
  const auto s = SearchSpace::inference();
  const std::vector v{2.0, 0.5, 0.3, 0.7};
  const HyperParams p = apply_params(HyperParams{}, s, v);
  EXPECT_EQ(p.gamma, 2.0);
  EXPECT_EQ(p.rho_r, 0.5);
  EXPECT_EQ(p.rho_in, 0.3);
  EXPECT_EQ(p.sigma, 0.7);
  EXPECT_THROW(apply_params(HyperParams{}, SearchSpace{{{"nope", 0, 1}}}, v), ParameterError);
}

TEST(Optimize, FindsBowlMinimum) {
  const std::vector c{0.3, 0.7, 0.55, 0.2};
  OptimizerOptions opt;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = optimize([&](std::span<const double> p) { return bowl(p, c); }, unit_box(4),
                            opt, seed);
    EXPECT_LT(std::sqrt(bowl(r.best, c)), 0.05) << "seed " << seed;
    EXPECT_EQ(r.trace.budget_used, 60);
  }
}

TEST(Optimize, InitialDesignOnlyIsRandomSearch) {
  OptimizerOptions opt;
  opt.budget = opt.initial_points;
  const auto r = optimize([](std::span<const double> p) { return p[0] + p[1]; }, unit_box(2), opt,
                          3);
  ASSERT_EQ(r.trace.values.size(), 10u);
  EXPECT_EQ(r.best_value, *std::min_element(r.trace.values.begin(), r.trace.values.end()));
  // Latin hypercube: one point per stratum in every coordinate.
  for (int j = 0; j < 2; ++j) {
    std::vector<int> strata;
    for (const auto& p : r.trace.points) strata.push_back(static_cast<int>(p[j] * 10.0));
    std::sort(strata.begin(), strata.end());
    for (int i = 0; i < 10; ++i) EXPECT_EQ(strata[i], i);
  }
}

TEST(Optimize, ConstantObjectiveGivesFlatTrace) {
  OptimizerOptions opt;
  opt.budget = 20;
  const auto r = optimize([](std::span<const double>) { return 4.0; }, unit_box(3), opt, 1);
  EXPECT_EQ(r.best_value, 4.0);
  for (double b : r.trace.best_so_far) EXPECT_EQ(b, 4.0);
  EXPECT_EQ(r.trace.values.size(), 20u);
}

TEST(Optimize, BestSoFarNeverIncreasesAndPointsStayFeasible) {
  const auto space = SearchSpace::serial_parity();
  OptimizerOptions opt;
  opt.budget = 40;
  auto objective = [&](std::span<const double> p) {
    return std::sin(3.0 * p[0]) + std::cos(p[2]) * p[3] + 0.1 * p[4] + p[1] * p[5];
  };
  const auto r = optimize(objective, space, opt, 8);
  for (std::size_t i = 1; i < r.trace.best_so_far.size(); ++i)
    EXPECT_LE(r.trace.best_so_far[i], r.trace.best_so_far[i - 1]);
  for (const auto& p : r.trace.points) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      EXPECT_GE(p[j], space.bounds[j].lower);
      EXPECT_LE(p[j], space.bounds[j].upper);
    }
    EXPECT_LE(p[0] + p[1], 1.0);
  }
}

TEST(Optimize, WindowConstraintBindsWhenOptimumIsOutside) {
  // Unconstrained optimum at t0 = delta_t = 1 violates t0 + delta_t <= 1.
  const auto space = SearchSpace::parallel_parity();
  OptimizerOptions opt;
  opt.budget = 30;
  const auto r = optimize([](std::span<const double> p) { return -p[0] - p[1]; }, space, opt, 4);
  for (const auto& p : r.trace.points) EXPECT_LE(p[0] + p[1], 1.0);
  EXPECT_GT(r.best[0] + r.best[1], 0.9);
}

TEST(Optimize, Deterministic) {
  OptimizerOptions opt;
  opt.budget = 25;
  auto f = [](std::span<const double> p) { return std::abs(p[0] - 0.4) + p[1] * p[1]; };
  const auto a = optimize(f, unit_box(2), opt, 77);
  const auto b = optimize(f, unit_box(2), opt, 77);
  EXPECT_EQ(a.trace.points, b.trace.points);
  EXPECT_EQ(a.trace.values, b.trace.values);
}

TEST(Optimize, BudgetBelowInitialDesignIsRejected) {
  OptimizerOptions opt;
  opt.budget = 5;
  EXPECT_THROW(optimize([](std::span<const double>) { return 0.0; }, unit_box(2), opt, 0),
               ParameterError);
}

TEST(Optimize, NonFiniteValuesArePenalized) {
  OptimizerOptions opt;
  opt.budget = 20;
  opt.penalty = PenaltyPolicy::fixed_value(1.0);
  auto f = [](std::span<const double> p) -> double {
    if (p[0] > 0.5) return std::numeric_limits<double>::quiet_NaN();
    if (p[1] > 0.8) throw std::runtime_error("diverged");
    return 0.2 + p[0];
  };
  const auto r = optimize(f, unit_box(2), opt, 5);
  ASSERT_EQ(r.trace.values.size(), 20u);
  int penalized = 0;
  for (std::size_t i = 0; i < r.trace.values.size(); ++i) {
    if (r.trace.penalized[i]) {
      ++penalized;
      EXPECT_EQ(r.trace.values[i], 1.0);
    } else {
      EXPECT_TRUE(std::isfinite(r.trace.values[i]));
    }
  }
  EXPECT_GT(penalized, 0);
  EXPECT_LE(r.best[0], 0.5);
}

TEST(Optimize, WorstMultiplePenalty) {
  OptimizerOptions opt;
  opt.budget = 10;
  opt.penalty = PenaltyPolicy::multiple_of_worst(10.0);
  int calls = 0;
  auto f = [&](std::span<const double>) {
    return ++calls == 5 ? std::numeric_limits<double>::infinity() : static_cast<double>(calls);
  };
  const auto r = optimize(f, unit_box(1), opt, 0);
  EXPECT_TRUE(r.trace.penalized[4]);
  EXPECT_EQ(r.trace.values[4], 40.0);
}

TEST(Optimize, StopsEarlyAtTarget) {
  OptimizerOptions opt;
  opt.stop_at = 0.0;
  int calls = 0;
  const auto r = optimize([&](std::span<const double>) { return ++calls >= 3 ? 0.0 : 1.0; },
                          unit_box(2), opt, 0);
  EXPECT_EQ(r.trace.budget_used, 3);
  EXPECT_EQ(r.best_value, 0.0);
}

void fit_smooth(GaussianProcess& gp, Matrix& x, Vector& y) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  x.resize(15, 3);
  y.resize(15);
  for (int i = 0; i < 15; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = u(rng);
    y[i] = std::sin(4.0 * x(i, 0)) + x(i, 1) * x(i, 2);
  }
  gp.fit(x, y, rng);
}

// At a training point the posterior mean misses y by nugget * (K + nugget I)^-1 y,
// so the residual sits below the noise standard deviation sqrt(nugget).
TEST(GaussianProcess, InterpolatesWithinNoiseLevel) {
  Matrix x;
  Vector y;
  GaussianProcess gp(1e-6);
  fit_smooth(gp, x, y);
  for (int i = 0; i < 15; ++i) {
    const auto [m, s] = gp.predict(x.row(i).transpose());
    EXPECT_LT(std::abs(m - y[i]), 1e-3 * gp.y_scale());
    EXPECT_LT(s, 1e-2 * gp.y_scale());
  }
}

TEST(GaussianProcess, TinyNuggetInterpolatesTightly) {
  Matrix x;
  Vector y;
  GaussianProcess gp(1e-12);
  fit_smooth(gp, x, y);
  for (int i = 0; i < 15; ++i) EXPECT_NEAR(gp.predict(x.row(i).transpose()).first, y[i], 1e-6);
}

TEST(ExpectedImprovement, Limits) {
  EXPECT_EQ(expected_improvement(2.0, 0.0, 1.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(expected_improvement(0.0, 0.0, 1.0, 0.0), 1.0);
  // Zero-mean unit-sd at best=0: EI = phi(0).
  EXPECT_NEAR(expected_improvement(0.0, 1.0, 0.0, 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi),
              1e-12);
  EXPECT_GT(expected_improvement(0.0, 2.0, 0.0, 0.0), expected_improvement(0.0, 1.0, 0.0, 0.0));
}

}  // namespace
}  // namespace symrc
