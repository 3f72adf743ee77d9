#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "symrc/tasks.hpp"

namespace symrc {
namespace {

std::vector<int> bits_of(std::uint64_t code, int n) {
  std::vector<int> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = (code >> i) & 1 ? 1 : -1;
  return w;
}

TEST(Parity, Examples) {
  EXPECT_EQ(parity(std::vector{1, 1, 1}), 1);
  EXPECT_EQ(parity(std::vector{-1, 1}), -1);
  EXPECT_EQ(parity(std::vector{-1, -1, 1, -1, 1, 1}), -1);
}

TEST(Parity, RejectsBadInput) {
  EXPECT_THROW(parity(std::vector{1, 0, 1}), DomainError);
  EXPECT_THROW(parity(std::vector<int>{}), ParameterError);
  EXPECT_THROW(equivalence_class(std::vector{2}), DomainError);
}

TEST(Parity, ClassDeterminesParityExhaustively) {
  for (int n = 1; n <= 12; ++n) {
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c) {
      const auto w = bits_of(c, n);
      const int l = equivalence_class(w);
      ASSERT_EQ(parity(w), (n - l) % 2 == 0 ? 1 : -1) << "n=" << n << " code=" << c;
    }
  }
}

TEST(Parity, InvariantUnderPermutation) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 500; ++t) {
    auto w = random_bits(1 + t % 15, rng()).bits;
    const int p = parity(w);
    std::shuffle(w.begin(), w.end(), rng);
    EXPECT_EQ(parity(w), p);
  }
}

TEST(Parity, InversionFlipsOddOrders) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 500; ++t) {
    const int n = 1 + t % 15;
    auto w = random_bits(n, rng()).bits;
    const int p = parity(w);
    for (int& b : w) b = -b;
    EXPECT_EQ(parity(w), n % 2 == 0 ? p : -p);
  }
}

TEST(EquivalenceClass, Examples) {
  EXPECT_EQ(equivalence_class(std::vector{1, 1, -1}), 2);
  EXPECT_EQ(equivalence_class(std::vector(5, -1)), 0);
}

TEST(EquivalenceClass, SetSizesAreBinomial) {
  for (int n = 1; n <= 10; ++n) {
    std::vector<long> sizes(static_cast<std::size_t>(n) + 1, 0);
    for (std::uint64_t c = 0; c < (std::uint64_t{1} << n); ++c)
      ++sizes[static_cast<std::size_t>(equivalence_class(bits_of(c, n)))];
    long binom = 1;
    for (int l = 0; l <= n; ++l) {
      EXPECT_EQ(sizes[static_cast<std::size_t>(l)], binom);
      binom = binom * (n - l) / (l + 1);
    }
  }
}

TEST(RandomBits, Deterministic) {
  EXPECT_EQ(random_bits(100, 5).bits, random_bits(100, 5).bits);
  EXPECT_NE(random_bits(100, 5).bits, random_bits(100, 6).bits);
}

TEST(RandomBits, FairOnAverage) {
  const auto s = random_bits(100000, 77);
  const double mean = std::accumulate(s.bits.begin(), s.bits.end(), 0.0) / 1e5;
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(1e5));
  for (int b : s.bits) ASSERT_TRUE(b == 1 || b == -1);
}

TEST(RandomBits, SingleBit) {
  const auto s = random_bits(1, 3);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_TRUE(s.bits[0] == 1 || s.bits[0] == -1);
  EXPECT_THROW(random_bits(0, 1), ParameterError);
}

TEST(Coverage, Examples) {
  BitSeries s;
  s.bits = {-1, -1, 1, 1, -1};
  EXPECT_TRUE(coverage_check(s, 2).complete);
  s.bits = {1, 1, 1, 1};
  const auto c = coverage_check(s, 2);
  EXPECT_FALSE(c.complete);
  EXPECT_EQ(c.counts[3], 3);
  EXPECT_THROW(coverage_check(s, 5), ParameterError);
}

TEST(Coverage, MatchesWindowScan) {
  const auto s = random_bits(1000, 1234);
  const auto c = coverage_check(s, 6);
  std::map<std::vector<int>, long> scan;
  for (std::size_t i = 0; i + 6 <= s.size(); ++i)
    ++scan[std::vector<int>(s.bits.begin() + static_cast<long>(i),
                            s.bits.begin() + static_cast<long>(i) + 6)];
  long total = 0;
  for (std::uint64_t code = 0; code < 64; ++code) {
    std::vector<int> w(6);
    for (int j = 0; j < 6; ++j) w[static_cast<std::size_t>(j)] = (code >> (5 - j)) & 1 ? 1 : -1;
    EXPECT_EQ(c.counts[code], scan.count(w) ? scan[w] : 0) << code;
    EXPECT_EQ(pattern_index(w), code);
    total += c.counts[code];
  }
  EXPECT_EQ(total, 995);
  EXPECT_EQ(c.complete, scan.size() == 64);
  EXPECT_TRUE(c.complete);
}

TEST(Coupon, ClosedForms) {
  EXPECT_DOUBLE_EQ(coupon_expectation(1), 3.0);
  EXPECT_NEAR(coupon_expectation(3), 21.742857142857, 1e-9);
  EXPECT_EQ(std::ceil(coupon_expectation(3)), 22.0);
  EXPECT_THROW(coupon_expectation(0), ParameterError);
}

TEST(Coupon, MatchesMonteCarlo) {
  constexpr int kTrials = 100000;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> draw(0, 255);
  std::vector<char> seen(256);
  double total = 0.0;
  for (int t = 0; t < kTrials; ++t) {
    std::fill(seen.begin(), seen.end(), 0);
    int distinct = 0;
    long draws = 0;
    while (distinct < 256) {
      ++draws;
      char& s = seen[static_cast<std::size_t>(draw(rng))];
      if (!s) {
        s = 1;
        ++distinct;
      }
    }
    total += static_cast<double>(draws);
  }
  EXPECT_LT(std::abs(total / kTrials / coupon_expectation(8) - 1.0), 0.01);
}

TEST(MinimalTraining, Examples) {
  const auto s6 = minimal_training_bits(6);
  EXPECT_EQ(s6.bits, (std::vector{-1, -1, -1, -1, -1, -1, 1, 1, 1}));
  EXPECT_EQ(minimal_training_bits(7).size(), 10u);
  EXPECT_EQ(minimal_training_bits(2).bits, (std::vector{-1, -1, 1}));
  EXPECT_EQ(s_max(7), 3);
  EXPECT_EQ(s_max(6), 3);
}

TEST(MinimalTraining, HitsEveryLowClassOnce) {
  for (int n = 1; n <= 100; ++n) {
    const auto s = minimal_training_bits(n);
    std::vector<int> hits(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t end = static_cast<std::size_t>(n) - 1; end < s.size(); ++end)
      ++hits[static_cast<std::size_t>(equivalence_class(s.window(end, n)))];
    for (int l = 0; l <= n; ++l)
      ASSERT_EQ(hits[static_cast<std::size_t>(l)], l <= s_max(n) ? 1 : 0) << n << " " << l;
  }
}

TEST(Exhaustive, EveryPatternExactlyOnce) {
  for (int n = 1; n <= 14; ++n) {
    const auto s = exhaustive_bits(n);
    ASSERT_EQ(s.size(), (std::size_t{1} << n) + static_cast<std::size_t>(n) - 1);
    const auto c = coverage_check(s, n);
    for (long v : c.counts) ASSERT_EQ(v, 1) << "n=" << n;
  }
}

TEST(TappedDelay, NewestFirst) {
  BitSeries s;
  s.bits = {1, -1, -1, 1};
  EXPECT_EQ(tapped_delay(s, 3, 3), (std::vector{1, -1, -1}));
  EXPECT_EQ(tapped_delay(s, 1, 2), (std::vector{-1}));
  EXPECT_THROW(tapped_delay(s, 3, 1), ParameterError);
  EXPECT_THROW(tapped_delay(s, 2, 4), ParameterError);
}

TEST(TappedDelay, ConsecutiveWordsOverlap) {
  const auto s = random_bits(50, 8);
  for (std::size_t i = 5; i + 1 < s.size(); ++i) {
    const auto a = tapped_delay(s, 6, i);
    const auto b = tapped_delay(s, 6, i + 1);
    EXPECT_TRUE(std::equal(a.begin(), a.end() - 1, b.begin() + 1));
  }
}

TEST(Lorenz, Equilibria) {
  EXPECT_EQ(lorenz_derivative(Vec3::Zero()), Vec3::Zero());
  const double q = std::sqrt(72.0);
  for (double sgn : {1.0, -1.0})
    EXPECT_LT(lorenz_derivative(Vec3(sgn * q, sgn * q, 27.0)).norm(), 1e-12);
}

TEST(Lorenz, ReflectionSymmetry) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int t = 0; t < 100; ++t) {
    const Vec3 s(u(rng), u(rng), u(rng) + 20.0);
    const Vec3 d = lorenz_derivative(s);
    const Vec3 m = lorenz_derivative(Vec3(-s.x(), -s.y(), s.z()));
    EXPECT_EQ(m, Vec3(-d.x(), -d.y(), d.z()));
  }
}

TEST(Lorenz, OriginStaysPut) {
  const Matrix traj = integrate_lorenz(Vec3::Zero(), 1e-3, 1000);
  EXPECT_EQ(traj.rows(), 1001);
  EXPECT_EQ(traj.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Lorenz, Rk4SelfConvergence) {
  const Vec3 x0(1.0, 2.0, 20.0);
  const Matrix coarse = integrate_lorenz(x0, 1e-4, 10000);
  const Matrix fine = integrate_lorenz(x0, 5e-5, 20000);
  EXPECT_LT((coarse.row(10000) - fine.row(20000)).norm(), 1e-8);
}

TEST(Lorenz, TrajectoryReflectsBitExactly) {
  const Matrix a = integrate_lorenz(Vec3(3.0, -4.0, 15.0), 1e-3, 5000);
  const Matrix b = integrate_lorenz(Vec3(-3.0, 4.0, 15.0), 1e-3, 5000);
  EXPECT_EQ(b.col(0), -a.col(0));
  EXPECT_EQ(b.col(1), -a.col(1));
  EXPECT_EQ(b.col(2), a.col(2));
}

TEST(Lorenz, RejectsBadStep) {
  EXPECT_THROW(integrate_lorenz(Vec3::Zero(), 0.0, 10), ParameterError);
  EXPECT_THROW(integrate_lorenz(Vec3::Zero(), 1e-3, -1), ParameterError);
}

TEST(InferenceDataset, SampleCountAndSpacing) {
  const auto d = make_inference_dataset(100.0, false, 1);
  ASSERT_EQ(d.samples(), 20000);
  for (Eigen::Index i = 1; i < d.samples(); ++i)
    ASSERT_NEAR(d.times[i] - d.times[i - 1], 0.005, 1e-12);
  EXPECT_EQ(d.input, d.xyz.leftCols(2));
  EXPECT_EQ(d.target, d.xyz.col(2));
}

TEST(InferenceDataset, SquaredInput) {
  const auto plain = make_inference_dataset(10.0, false, 4);
  const auto sq = make_inference_dataset(10.0, true, 4);
  EXPECT_EQ(plain.xyz, sq.xyz);
  EXPECT_EQ(sq.input, plain.xyz.leftCols(2).array().square().matrix());
}

TEST(InferenceDataset, StaysOnAttractor) {
  std::set<double> first_z;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = make_inference_dataset(100.0, false, seed);
    ASSERT_TRUE(d.xyz.allFinite());
    EXPECT_LT(d.xyz.col(0).cwiseAbs().maxCoeff(), 30.0);
    EXPECT_LT(d.xyz.col(1).cwiseAbs().maxCoeff(), 30.0);
    EXPECT_GT(d.target.minCoeff(), 0.0);
    EXPECT_LT(d.target.maxCoeff(), 50.0);
    first_z.insert(d.target[0]);
  }
  EXPECT_EQ(first_z.size(), 20u);
}

TEST(InferenceDataset, RejectsBadArguments) {
  EXPECT_THROW(make_inference_dataset(0.0, false, 1), ParameterError);
  LorenzSampling opt;
  opt.sample_dt = 0.00015;
  EXPECT_THROW(make_inference_dataset(1.0, false, 1, opt), ParameterError);
}

}  // namespace
}  // namespace symrc
