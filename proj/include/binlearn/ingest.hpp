#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "binlearn/learner.hpp"

namespace binlearn {

using TokenStream = std::vector<std::string>;

inline constexpr std::string_view kSequenceStart = "<s>";
inline constexpr std::string_view kSequenceEnd = "</s>";

// lowercase, whitespace-split, ASCII punctuation stripped from token edges;
// internal apostrophes/hyphens survive; idempotent on its own output
TokenStream tokenize(std::string_view text);

// (predecessor, word) pairs with start/end sentinels: n tokens -> n+1 instances
CorpusData extract_bigram_instances(std::span<const std::string> tokens);

// (window head, other word) pairs over sliding windows of `width` tokens:
// n >= width -> (n - width + 1)(width - 1) instances; 0 < n < width -> one
// truncated window with n - 1 instances
CorpusData extract_window_instances(std::span<const std::string> tokens, int width);

struct InstanceStats {
  std::int64_t m = 0;
  std::int64_t observed_bins = 0;
  std::vector<std::pair<std::string, std::int64_t>> histogram;  // bin id -> frequency
  std::int64_t declared_num_values = 0;
  std::int64_t slot_count = 0;          // slots(observed_bins, declared_num_values)
  double mean_instances_per_bin = 0.0;
};

InstanceStats instance_stats(const CorpusData& data, std::int64_t declared_num_values);

void save_instance_stats_json(const InstanceStats& stats, std::ostream& out);

}  // namespace binlearn
