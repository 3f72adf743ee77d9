#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "symrc/errors.hpp"

namespace symrc::harness {

enum class ScalingModel { linear, exponential };

inline ScalingModel parse_scaling_model(const std::string& s) {
  if (s == "linear") return ScalingModel::linear;
  if (s == "exponential") return ScalingModel::exponential;
  throw ParameterError("unknown scaling model '" + s + "' (linear | exponential)");
}

/// linear:      N = slope n + intercept
/// exponential: log N = slope n + intercept
struct ScalingFit {
  ScalingModel model = ScalingModel::linear;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of N (or log N) on n. R^2 is measured in the fitted space.
inline ScalingFit fit_scaling(std::span<const double> n, std::span<const double> nodes,
                              ScalingModel model) {
  if (n.size() != nodes.size()) throw ShapeError("fit_scaling: length mismatch");
  if (n.size() < 3) throw ParameterError("fit_scaling: need at least 3 points");
  const double count = static_cast<double>(n.size());
  double mx = 0.0, my = 0.0;
  std::vector<double> y(nodes.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (model == ScalingModel::exponential && !(nodes[i] > 0.0))
      throw ParameterError("fit_scaling: exponential model needs N > 0");
    y[i] = model == ScalingModel::linear ? nodes[i] : std::log(nodes[i]);
    mx += n[i];
    my += y[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxx += (n[i] - mx) * (n[i] - mx);
    sxy += (n[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw ParameterError("fit_scaling: all n values are equal");
  ScalingFit f;
  f.model = model;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = y[i] - (f.slope * n[i] + f.intercept);
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

}  // namespace symrc::harness
