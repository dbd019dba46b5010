#include "cem/rng.hpp"

#include <algorithm>
#include <cmath>

namespace cem {

std::uint64_t Rng::poisson(double mu) {
  if (mu <= 0.0) return 0;
  mu = std::min(mu, 1e4);
  std::uint64_t total = 0;
  // Poisson(a + b) = Poisson(a) + Poisson(b); chunking keeps exp(-mu) sane.
  while (mu > 0.0) {
    const double chunk = std::min(mu, 500.0);
    const double limit = std::exp(-chunk);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    total += k - 1;
    mu -= chunk;
  }
  return total;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  if (k > n) k = n;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(below(n - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace cem
