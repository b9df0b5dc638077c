#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "binlearn/learner.hpp"
#include "binlearn/model.hpp"

namespace binlearn {

struct SimulationResult {
  std::int64_t trials = 0;
  std::int64_t m = 0;
  double mean_error = 0.0;
  double std_error = 0.0;              // sample stddev / sqrt(trials)
  std::vector<double> per_trial_errors;
  double empty_bin_hit_rate = 0.0;     // mean over trials of untrained bin mass
};

// m iid draws: bin ~ bin_probs, then value ~ cond[bin]
Corpus sample_corpus(const ProcessorModel& model, std::int64_t m, std::uint64_t seed);

// exact expected error of a learned map under the model; bins left untrained
// contribute their fallback policy's expected error analytically
double realized_error(const ProcessorModel& model, const LearnedMap& learned);

// per-trial seed derivation; exposed so callers can reproduce single trials
std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial);

// repeated sample -> train -> evaluate; trials merge by index, so the result
// is bit-identical for a given (seed, trials) at any thread count
SimulationResult monte_carlo(const ProcessorModel& model, std::int64_t m, std::int64_t trials,
                             std::uint64_t seed, FallbackPolicy policy, int default_value = -1,
                             int threads = 1);

// exact expectation by enumerating every corpus of length m with its
// probability; mode ties and global-mode ties averaged exactly; usable while
// (|B|*|V|)^m <= 10^7
double brute_force_expected_error(const ProcessorModel& model, int m, FallbackPolicy policy,
                                  int default_value = -1);

void save_simulation_json(const SimulationResult& result, std::ostream& out);

}  // namespace binlearn
