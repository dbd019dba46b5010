#include "cem/stats.hpp"

#include <algorithm>
#include <cmath>

#include "cem/error.hpp"

namespace cem {

double mean(std::span<const double> v) {
  if (v.empty()) throw EmptyInputError("mean of empty range");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) {
    const double d = x - m;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double quantile(std::span<const double> v, double p) {
  if (v.empty()) throw EmptyInputError("quantile of empty range");
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const double pos = p * static_cast<double>(s.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= s.size()) return s.back();
  const double frac = pos - static_cast<double>(lo);
  return s[lo] + frac * (s[lo + 1] - s[lo]);
}

double median(std::span<const double> v) { return quantile(v, 0.5); }

}  // namespace cem
