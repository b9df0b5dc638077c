#include "binlearn/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "binlearn/numeric.hpp"
#include "binlearn/rng.hpp"

namespace binlearn {

namespace {

int pick_from_cdf(const std::vector<double>& cdf, const std::vector<double>& probs, double u) {
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  if (it == cdf.end()) {
    int idx = static_cast<int>(cdf.size()) - 1;
    while (idx > 0 && probs[idx] == 0.0) --idx;
    return idx;
  }
  return static_cast<int>(it - cdf.begin());
}

std::vector<double> running_sums(const std::vector<double>& probs) {
  std::vector<double> cdf(probs.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += probs[i];
    cdf[i] = total;
  }
  return cdf;
}

double fallback_expected_error(const ProcessorModel& model, const LearnedMap& learned, int bin) {
  const auto& row = model.cond[bin];
  switch (learned.fallback) {
    case FallbackPolicy::UniformRandomValue: {
      CompensatedSum sum;
      for (double p : row) sum.add(p);
      return 1.0 - sum.value() / static_cast<double>(row.size());
    }
    case FallbackPolicy::FixedDefaultValue:
    case FallbackPolicy::GlobalMode: {
      int v = learned.fallback_value;
      if (v < 0 || v >= static_cast<int>(row.size())) {
        throw std::invalid_argument("learned map has no usable fallback value");
      }
      return 1.0 - row[v];
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Corpus sample_corpus(const ProcessorModel& model, std::int64_t m, std::uint64_t seed) {
  if (m < 0) throw std::invalid_argument("corpus size must be non-negative");
  const auto bin_cdf = running_sums(model.bin_probs);
  std::vector<std::vector<double>> row_cdfs;
  row_cdfs.reserve(model.cond.size());
  for (const auto& row : model.cond) row_cdfs.push_back(running_sums(row));

  Corpus corpus;
  corpus.instances.reserve(static_cast<std::size_t>(m));
  SplitMix64 rng(seed);
  for (std::int64_t i = 0; i < m; ++i) {
    int b = pick_from_cdf(bin_cdf, model.bin_probs, rng.next_unit());
    int v = pick_from_cdf(row_cdfs[b], model.cond[b], rng.next_unit());
    corpus.instances.push_back({b, v});
  }
  return corpus;
}

double realized_error(const ProcessorModel& model, const LearnedMap& learned) {
  const int num_bins = model.domain.num_bins();
  if (static_cast<int>(learned.assignment.size()) != num_bins) {
    throw std::invalid_argument("learned map does not cover the model's bins");
  }
  CompensatedSum acc;
  for (int b = 0; b < num_bins; ++b) {
    int v = learned.assignment[b];
    double err = (v >= 0) ? 1.0 - model.cond[b][v] : fallback_expected_error(model, learned, b);
    acc.add(model.bin_probs[b] * err);
  }
  return std::clamp(acc.value(), 0.0, 1.0);
}

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
  return mix_seed(seed, static_cast<std::uint64_t>(trial));
}

SimulationResult monte_carlo(const ProcessorModel& model, std::int64_t m, std::int64_t trials,
                             std::uint64_t seed, FallbackPolicy policy, int default_value,
                             int threads) {
  if (trials < 1) throw std::invalid_argument("no trials");
  threads = std::clamp<int>(threads, 1, static_cast<int>(std::min<std::int64_t>(trials, 64)));

  std::vector<double> errors(static_cast<std::size_t>(trials));
  std::vector<double> empty_mass(static_cast<std::size_t>(trials));

  auto run_range = [&](std::int64_t lo, std::int64_t hi) {
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::uint64_t ts = trial_seed(seed, t);
      Corpus corpus = sample_corpus(model, m, ts);
      LearnedMap learned = train_mode(corpus, model.domain, policy, ts, default_value);
      errors[static_cast<std::size_t>(t)] = realized_error(model, learned);
      CompensatedSum untrained;
      for (int b = 0; b < model.domain.num_bins(); ++b) {
        if (learned.assignment[b] < 0) untrained.add(model.bin_probs[b]);
      }
      empty_mass[static_cast<std::size_t>(t)] = untrained.value();
    }
  };

  if (threads == 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    const std::int64_t chunk = (trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      std::int64_t lo = w * chunk;
      std::int64_t hi = std::min<std::int64_t>(lo + chunk, trials);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
  }

  SimulationResult result;
  result.trials = trials;
  result.m = m;

  CompensatedSum err_sum;
  for (double e : errors) err_sum.add(e);
  result.mean_error = err_sum.value() / static_cast<double>(trials);

  if (trials > 1) {
    CompensatedSum sq;
    for (double e : errors) {
      double d = e - result.mean_error;
      sq.add(d * d);
    }
    double variance = sq.value() / static_cast<double>(trials - 1);
    result.std_error = std::sqrt(std::max(0.0, variance) / static_cast<double>(trials));
  }

  CompensatedSum empty_sum;
  for (double e : empty_mass) empty_sum.add(e);
  result.empty_bin_hit_rate = empty_sum.value() / static_cast<double>(trials);

  result.per_trial_errors = std::move(errors);
  return result;
}

double brute_force_expected_error(const ProcessorModel& model, int m, FallbackPolicy policy,
                                  int default_value) {
  if (m < 0) throw std::invalid_argument("m must be non-negative");
  const int num_bins = model.domain.num_bins();
  const int num_values = model.domain.num_values();
  if (policy == FallbackPolicy::FixedDefaultValue &&
      (default_value < 0 || default_value >= num_values)) {
    throw std::invalid_argument("fixed-default-value policy needs a value from the domain");
  }

  const std::int64_t branching = static_cast<std::int64_t>(num_bins) * num_values;
  double combos = 1.0;
  for (int i = 0; i < m; ++i) {
    combos *= static_cast<double>(branching);
    if (combos > 1e7) throw std::runtime_error("instance too large for oracle");
  }

  std::vector<double> instance_prob(static_cast<std::size_t>(branching));
  for (int b = 0; b < num_bins; ++b) {
    for (int v = 0; v < num_values; ++v) {
      instance_prob[static_cast<std::size_t>(b) * num_values + v] =
          model.bin_probs[b] * model.cond[b][v];
    }
  }

  // expected fallback error with every bin empty, per policy
  std::vector<double> policy_fallback(num_bins, 0.0);
  std::vector<double> global_choice_error(num_values, 0.0);  // T[g] = sum_b p_b (1 - cond[b][g])
  if (policy == FallbackPolicy::GlobalMode) {
    for (int g = 0; g < num_values; ++g) {
      CompensatedSum t;
      for (int b = 0; b < num_bins; ++b) t.add(model.bin_probs[b] * (1.0 - model.cond[b][g]));
      global_choice_error[g] = t.value();
    }
  } else {
    for (int b = 0; b < num_bins; ++b) {
      if (policy == FallbackPolicy::UniformRandomValue) {
        CompensatedSum row;
        for (double p : model.cond[b]) row.add(p);
        policy_fallback[b] = 1.0 - row.value() / static_cast<double>(num_values);
      } else {
        policy_fallback[b] = 1.0 - model.cond[b][default_value];
      }
    }
  }
  double all_empty_fallback = 0.0;
  {
    CompensatedSum t;
    for (int b = 0; b < num_bins; ++b) t.add(model.bin_probs[b] * policy_fallback[b]);
    all_empty_fallback = t.value();
  }

  std::vector<std::int64_t> counts(static_cast<std::size_t>(branching), 0);
  std::vector<std::int64_t> value_counts(num_values, 0);
  std::vector<int> path(static_cast<std::size_t>(m), 0);
  std::vector<int> touched;
  touched.reserve(static_cast<std::size_t>(m));
  CompensatedSum total;

  auto corpus_error = [&]() {
    touched.clear();
    for (int i = 0; i < m; ++i) touched.push_back(path[i] / num_values);
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());

    double err = 0.0;
    if (policy == FallbackPolicy::GlobalMode) {
      std::int64_t best = 0;
      for (std::int64_t c : value_counts) best = std::max(best, c);
      double tied_sum = 0.0;
      int tied_count = 0;
      for (int g = 0; g < num_values; ++g) {
        if (value_counts[g] != best) continue;
        double empty_part = global_choice_error[g];
        for (int b : touched) empty_part -= model.bin_probs[b] * (1.0 - model.cond[b][g]);
        tied_sum += empty_part;
        ++tied_count;
      }
      err += tied_sum / static_cast<double>(tied_count);
    } else {
      double nonempty_fallback = 0.0;
      for (int b : touched) nonempty_fallback += model.bin_probs[b] * policy_fallback[b];
      err += all_empty_fallback - nonempty_fallback;
    }

    for (int b : touched) {
      const std::int64_t* row = counts.data() + static_cast<std::size_t>(b) * num_values;
      std::int64_t best = 0;
      for (int v = 0; v < num_values; ++v) best = std::max(best, row[v]);
      double tied_sum = 0.0;
      int tied_count = 0;
      for (int v = 0; v < num_values; ++v) {
        if (row[v] != best) continue;
        tied_sum += 1.0 - model.cond[b][v];
        ++tied_count;
      }
      err += model.bin_probs[b] * (tied_sum / static_cast<double>(tied_count));
    }
    return err;
  };

  auto descend = [&](auto&& self, int depth, double prob) -> void {
    if (prob == 0.0) return;
    if (depth == m) {
      total.add(prob * corpus_error());
      return;
    }
    for (int idx = 0; idx < branching; ++idx) {
      path[depth] = idx;
      ++counts[idx];
      ++value_counts[idx % num_values];
      self(self, depth + 1, prob * instance_prob[idx]);
      --counts[idx];
      --value_counts[idx % num_values];
    }
  };
  descend(descend, 0, 1.0);
  return std::clamp(total.value(), 0.0, 1.0);
}

void save_simulation_json(const SimulationResult& result, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["m"] = result.m;
  doc["trials"] = result.trials;
  doc["mean_error"] = result.mean_error;
  doc["std_error"] = result.std_error;
  doc["empty_bin_hit_rate"] = result.empty_bin_hit_rate;
  doc["per_trial_errors"] = result.per_trial_errors;
  out << doc.dump(2) << '\n';
}

}  // namespace binlearn
