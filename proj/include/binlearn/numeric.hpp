#pragma once

#include <cmath>
#include <cstdint>

namespace binlearn {

// Neumaier-compensated accumulator. Summation error stays O(eps) independent
// of term count; a fixed add order gives bit-identical results.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Exact C(n, k) for n <= 64 (C(64,32) fits in int64; intermediates need 128 bits).
std::int64_t exact_binomial(int n, int k);

// log C(n, k) via lgamma, for the n > 64 regime.
double log_binomial(std::int64_t n, std::int64_t k);

// log Pr[Binomial(n, p) = k] for p in (0, 1).
double log_binomial_pmf(std::int64_t k, std::int64_t n, double p);

}  // namespace binlearn
