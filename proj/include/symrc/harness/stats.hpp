#pragma once

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "symrc/errors.hpp"

namespace symrc::harness {

inline double mean(std::span<const double> v) {
  if (v.empty()) throw ParameterError("mean: empty sample");
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Quantile by linear interpolation between order statistics (type 7).
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw ParameterError("quantile: empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("quantile: q must lie in [0, 1]");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double zero_fraction = 0.0;
};

inline Summary summarize(std::span<const double> v) {
  if (v.empty()) throw ParameterError("summarize: empty sample");
  const std::vector<double> s(v.begin(), v.end());
  Summary out;
  out.count = s.size();
  out.mean = mean(s);
  out.min = *std::min_element(s.begin(), s.end());
  out.max = *std::max_element(s.begin(), s.end());
  out.q1 = quantile(s, 0.25);
  out.median = quantile(s, 0.5);
  out.q3 = quantile(s, 0.75);
  out.zero_fraction =
      static_cast<double>(std::count(s.begin(), s.end(), 0.0)) / static_cast<double>(s.size());
  return out;
}

/// Ranks starting at 1; tied values share their average rank.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

struct Correlation {
  double rho = 0.0;
  double p_two_sided = 1.0;
  double p_negative = 1.0;  ///< one-sided, alternative rho < 0
};

/// Spearman rank correlation with the t approximation for its p-value.
inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("spearman: length mismatch");
  if (x.size() < 3) throw ParameterError("spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx), my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  Correlation c;
  if (sxx == 0.0 || syy == 0.0) return c;
  c.rho = sxy / std::sqrt(sxx * syy);
  const double dof = static_cast<double>(x.size()) - 2.0;
  if (std::abs(c.rho) >= 1.0) {
    c.p_two_sided = 0.0;
    c.p_negative = c.rho < 0.0 ? 0.0 : 1.0;
    return c;
  }
  const double t = c.rho * std::sqrt(dof / (1.0 - c.rho * c.rho));
  boost::math::students_t dist(dof);
  c.p_two_sided = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  c.p_negative = boost::math::cdf(dist, t);
  return c;
}

}  // namespace symrc::harness
