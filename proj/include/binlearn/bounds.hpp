#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "binlearn/learner.hpp"
#include "binlearn/model.hpp"

namespace binlearn {

// (c, beta) describe a skewed bin distribution: a low-probability subset
// carrying total mass c and occupying a (1-beta) fraction of the bins.
struct SkewParams {
  double c = 0.0;
  double beta = 1.0;
  double beta_c = 1.0;  // beta / (1 - c)
};

SkewParams make_skew_params(double c, double beta);

// probability mass expected to land in bins left empty by an m-instance corpus
double empty_bin_mass_exact(const ProcessorModel& model, std::int64_t m);

// distribution-free pair: ((1 - 1/|B|)^m, e^(-m/|B|))
std::pair<double, double> empty_bin_mass_bounds(std::int64_t num_bins, std::int64_t m);

// upper bound on a bin's expected decision error after n training instances,
// q = probability of the bin's most likely value; even n falls back to n-1
double u_bound(double q, std::int64_t n);

// (1 - q^2, 2(1 - q)): the single-instance bound and its factor-two envelope
std::pair<double, double> factor_two_bound(double q);

// min(1, c + e^(-m / (beta_c * |B|)))
double skewed_empty_bound(const SkewParams& params, std::int64_t num_bins, std::int64_t m);

// ascending-probability prefix with mass <= tail_mass becomes the low subset;
// boundary ties are taken in bin-id order
SkewParams estimate_skew_params(
    const std::vector<std::pair<std::string, std::int64_t>>& bin_frequencies,
    double tail_mass);

// expected-error upper bound for a mode learner trained on m instances:
// per bin, Binomial(m, p_b) mixture of fallback error (n = 0) and u_bound (n >= 1)
double corpus_error_bound(const ProcessorModel& model, std::int64_t m,
                          std::span<const double> fallback_error);

// per-bin expected error of a fallback policy under the model; for global-mode
// this is the worst case over values (the realized choice depends on the corpus)
std::vector<double> analytic_fallback_errors(const ProcessorModel& model, FallbackPolicy policy,
                                             int default_value = -1);
std::vector<double> conservative_fallback_errors(const ProcessorModel& model);

struct PerBinBound {
  std::string bin;
  double top_prob;      // q
  double floor_error;   // 1 - q
  double u1, u3, u5;
};

struct BoundReport {
  std::int64_t m = 0;
  double w_exact = 0.0;
  double w_finite_bound = 0.0;
  double w_exp_bound = 0.0;
  std::vector<PerBinBound> per_bin;
  double corpus_bound = 0.0;
  double r_opt = 0.0;
};

BoundReport make_bound_report(const ProcessorModel& model, std::int64_t m,
                              std::span<const double> fallback_error);

}  // namespace binlearn
