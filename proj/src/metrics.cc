#include "sentvec/metrics.h"

#include <algorithm>
#include <cmath>

namespace sentvec {

const char* to_string(Measure m) {
  return m == Measure::kAccuracy ? "accuracy" : "pearson";
}

void EvalResult::validate() const {
  if (n == 0) throw ValidationError(task_name + "/" + method_name + ": n = 0");
  const bool ok = measure == Measure::kAccuracy ? value >= 0.0 && value <= 1.0
                                                : value >= -1.0 && value <= 1.0;
  if (!ok)
    throw ValidationError(task_name + "/" + method_name + ": " +
                          to_string(measure) + " " + std::to_string(value) +
                          " out of range");
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ValidationError("pearson: sequences of different length");
  const std::size_t n = x.size();
  if (n < 2) throw ValidationError("pearson: need at least two samples");
  // Checked exactly: the mean of identical values can be off by one ulp.
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
  };
  if (constant(x) || constant(y))
    throw DegenerateInputError("pearson: zero variance (constant sequence)");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  // n - 1 sample convention; it cancels in the ratio.
  const double denom = static_cast<double>(n - 1);
  sxy /= denom;
  sxx /= denom;
  syy /= denom;
  if (sxx == 0.0 || syy == 0.0)
    throw DegenerateInputError("pearson: zero variance (constant sequence)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace sentvec
