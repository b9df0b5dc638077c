#include "binlearn/numeric.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>
#include <string>

namespace binlearn {

std::int64_t exact_binomial(int n, int k) {
  if (n < 0 || k < 0 || k > n) throw std::invalid_argument("exact_binomial: bad arguments");
  if (n > 64) throw std::invalid_argument("exact_binomial: n > 64 overflows int64");
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
  }
  return static_cast<std::int64_t>(result);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (n < 0 || k < 0 || k > n) throw std::invalid_argument("log_binomial: bad arguments");
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_binomial_pmf(std::int64_t k, std::int64_t n, double p) {
  return log_binomial(n, k) + static_cast<double>(k) * std::log(p) +
         static_cast<double>(n - k) * std::log1p(-p);
}

}  // namespace binlearn
