#pragma once

#include <span>
#include <vector>

namespace cem {

double mean(std::span<const double> v);

// Sample standard deviation (n-1 denominator); 0 for n < 2.
double sample_sd(std::span<const double> v);

// Linear-interpolation quantile ("type 7"): index (n-1)*p into the sorted
// values. p in [0,1]. Input need not be sorted.
double quantile(std::span<const double> v, double p);

double median(std::span<const double> v);

}  // namespace cem
