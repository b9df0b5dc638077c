#include "binlearn/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "binlearn/numeric.hpp"

namespace binlearn {

namespace {

// pmf terms below e^-46 (~1e-20) are folded into a conservative remainder
constexpr double kLogPmfFloor = -46.0;

}  // namespace

SkewParams make_skew_params(double c, double beta) {
  if (!(c >= 0.0 && c <= 1.0 - 1e-12)) {
    throw std::invalid_argument("skew mass c must lie in [0, 1)");
  }
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("skew fraction beta must lie in (0, 1]");
  }
  SkewParams params;
  params.c = c;
  params.beta = beta;
  params.beta_c = beta / (1.0 - c);
  return params;
}

double empty_bin_mass_exact(const ProcessorModel& model, std::int64_t m) {
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  CompensatedSum acc;
  for (double p : model.bin_probs) {
    acc.add(p * std::pow(1.0 - p, static_cast<double>(m)));
  }
  return acc.value();
}

std::pair<double, double> empty_bin_mass_bounds(std::int64_t num_bins, std::int64_t m) {
  if (num_bins < 1) throw std::invalid_argument("num_bins must be at least 1");
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  const double inv = 1.0 / static_cast<double>(num_bins);
  double finite = std::pow(1.0 - inv, static_cast<double>(m));
  double exponential = std::exp(-static_cast<double>(m) / static_cast<double>(num_bins));
  return {finite, exponential};
}

double u_bound(double q, std::int64_t n) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (n % 2 == 0) return u_bound(q, n - 1);
  if (q == 0.0) return 1.0;
  if (q == 1.0) return 0.0;

  // lower-tail form: (1-q) + q * Pr[Binomial(n, q) <= (n-1)/2]; a sum of
  // non-negative terms, so the result can never round below 1-q
  const std::int64_t half = (n - 1) / 2;
  CompensatedSum tail;
  if (n <= 64) {
    for (std::int64_t i = 0; i <= half; ++i) {
      double term = static_cast<double>(exact_binomial(static_cast<int>(n), static_cast<int>(i))) *
                    std::pow(1.0 - q, static_cast<double>(n - i)) *
                    std::pow(q, static_cast<double>(i));
      tail.add(term);
    }
  } else {
    for (std::int64_t i = 0; i <= half; ++i) {
      tail.add(std::exp(log_binomial(n, i) + static_cast<double>(i) * std::log(q) +
                        static_cast<double>(n - i) * std::log1p(-q)));
    }
  }
  double u = (1.0 - q) + q * std::min(1.0, tail.value());
  return std::min(1.0, u);
}

std::pair<double, double> factor_two_bound(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in [0, 1]");
  return {1.0 - q * q, 2.0 * (1.0 - q)};
}

double skewed_empty_bound(const SkewParams& params, std::int64_t num_bins, std::int64_t m) {
  if (num_bins < 1) throw std::invalid_argument("num_bins must be at least 1");
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  double exponent = -static_cast<double>(m) / (params.beta_c * static_cast<double>(num_bins));
  return std::min(1.0, params.c + std::exp(exponent));
}

SkewParams estimate_skew_params(
    const std::vector<std::pair<std::string, std::int64_t>>& bin_frequencies, double tail_mass) {
  if (bin_frequencies.empty()) throw std::runtime_error("no observations");
  if (!(tail_mass >= 0.0 && tail_mass < 1.0)) {
    throw std::invalid_argument("tail_mass must lie in [0, 1)");
  }
  std::int64_t total = 0;
  for (const auto& [id, count] : bin_frequencies) {
    if (count < 0) throw std::invalid_argument("negative frequency for bin '" + id + "'");
    total += count;
  }
  if (total == 0) throw std::runtime_error("no observations");

  std::vector<std::size_t> order(bin_frequencies.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (bin_frequencies[a].second != bin_frequencies[b].second) {
      return bin_frequencies[a].second < bin_frequencies[b].second;
    }
    return bin_frequencies[a].first < bin_frequencies[b].first;
  });

  CompensatedSum mass;
  std::size_t low_bins = 0;
  for (std::size_t i : order) {
    double p = static_cast<double>(bin_frequencies[i].second) / static_cast<double>(total);
    if (mass.value() + p > tail_mass) break;
    mass.add(p);
    ++low_bins;
  }
  if (low_bins == bin_frequencies.size()) {
    throw std::runtime_error("tail mass leaves no high-probability bins");
  }
  double beta = 1.0 - static_cast<double>(low_bins) / static_cast<double>(bin_frequencies.size());
  return make_skew_params(mass.value(), beta);
}

double corpus_error_bound(const ProcessorModel& model, std::int64_t m,
                          std::span<const double> fallback_error) {
  if (m < 1) throw std::invalid_argument("m must be positive");
  const int num_bins = model.domain.num_bins();
  if (static_cast<int>(fallback_error.size()) != num_bins) {
    throw std::invalid_argument("fallback_error must cover every bin");
  }

  CompensatedSum acc;
  for (int b = 0; b < num_bins; ++b) {
    const double p = model.bin_probs[b];
    if (p <= 0.0) continue;
    const double q = model.top_value_prob(b);

    if (p >= 1.0) {
      acc.add(p * u_bound(q, m));
      continue;
    }

    std::unordered_map<std::int64_t, double> u_memo;
    auto u_at = [&](std::int64_t n) {
      std::int64_t odd = (n % 2 == 0) ? n - 1 : n;
      auto it = u_memo.find(odd);
      if (it != u_memo.end()) return it->second;
      double u = u_bound(q, odd);
      u_memo.emplace(odd, u);
      return u;
    };

    // unimodal pmf: walk outward from the mode, fold negligible tails into a
    // worst-case (factor 1) remainder so the result stays an upper bound
    const std::int64_t mode = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::floor((static_cast<double>(m) + 1.0) * p)), 0, m);
    std::int64_t lo = mode, hi = mode;
    while (lo > 0 && log_binomial_pmf(lo - 1, m, p) >= kLogPmfFloor) --lo;
    while (hi < m && log_binomial_pmf(hi + 1, m, p) >= kLogPmfFloor) ++hi;

    CompensatedSum bin_term;
    CompensatedSum mass_seen;
    for (std::int64_t n = lo; n <= hi; ++n) {
      double pmf = std::exp(log_binomial_pmf(n, m, p));
      mass_seen.add(pmf);
      bin_term.add(pmf * (n == 0 ? fallback_error[b] : u_at(n)));
    }
    double remainder = 1.0 - mass_seen.value();
    if (remainder > 0.0) bin_term.add(remainder);
    acc.add(p * bin_term.value());
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

std::vector<double> analytic_fallback_errors(const ProcessorModel& model, FallbackPolicy policy,
                                             int default_value) {
  const int num_bins = model.domain.num_bins();
  const int num_values = model.domain.num_values();
  std::vector<double> out(num_bins, 0.0);
  switch (policy) {
    case FallbackPolicy::UniformRandomValue:
      for (int b = 0; b < num_bins; ++b) {
        CompensatedSum row;
        for (double p : model.cond[b]) row.add(p);
        out[b] = 1.0 - row.value() / static_cast<double>(num_values);
      }
      break;
    case FallbackPolicy::FixedDefaultValue:
      if (default_value < 0 || default_value >= num_values) {
        throw std::invalid_argument("fixed-default-value policy needs a value from the domain");
      }
      for (int b = 0; b < num_bins; ++b) out[b] = 1.0 - model.cond[b][default_value];
      break;
    case FallbackPolicy::GlobalMode:
      for (int b = 0; b < num_bins; ++b) {
        double worst = 0.0;
        for (double p : model.cond[b]) worst = std::max(worst, 1.0 - p);
        out[b] = worst;
      }
      break;
  }
  return out;
}

std::vector<double> conservative_fallback_errors(const ProcessorModel& model) {
  return std::vector<double>(model.domain.num_bins(), 1.0);
}

BoundReport make_bound_report(const ProcessorModel& model, std::int64_t m,
                              std::span<const double> fallback_error) {
  BoundReport report;
  report.m = m;
  report.w_exact = empty_bin_mass_exact(model, m);
  auto [finite, exponential] = empty_bin_mass_bounds(model.domain.num_bins(), m);
  report.w_finite_bound = finite;
  report.w_exp_bound = exponential;
  for (int b = 0; b < model.domain.num_bins(); ++b) {
    double q = model.top_value_prob(b);
    report.per_bin.push_back({model.domain.bin_id(b), q, 1.0 - q, u_bound(q, 1), u_bound(q, 3),
                              u_bound(q, 5)});
  }
  report.corpus_bound = corpus_error_bound(model, m, fallback_error);
  report.r_opt = optimal_error_rate(model);
  return report;
}

}  // namespace binlearn
