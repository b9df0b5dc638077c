#include "binlearn/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "binlearn/model.hpp"

namespace binlearn {

namespace {

bool ascii_space(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::isspace(u);
}

bool ascii_punct(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return u < 128 && std::ispunct(u);
}

std::string normalize_token(std::string_view raw) {
  std::size_t begin = 0;
  std::size_t end = raw.size();
  while (begin < end && ascii_punct(raw[begin])) ++begin;
  while (end > begin && ascii_punct(raw[end - 1])) --end;
  std::string token;
  token.reserve(end - begin);
  for (std::size_t i = begin; i < end; ++i) {
    unsigned char u = static_cast<unsigned char>(raw[i]);
    token.push_back(u < 128 ? static_cast<char>(std::tolower(u)) : raw[i]);
  }
  return token;
}

}  // namespace

TokenStream tokenize(std::string_view text) {
  TokenStream tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && ascii_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !ascii_space(text[i])) ++i;
    if (i > start) {
      std::string token = normalize_token(text.substr(start, i - start));
      if (!token.empty()) tokens.push_back(std::move(token));
    }
  }
  return tokens;
}

CorpusData extract_bigram_instances(std::span<const std::string> tokens) {
  CorpusData data;
  if (tokens.empty()) return data;
  auto add = [&](std::string_view bin, std::string_view value) {
    int b = data.domain.add_bin(std::string(bin));
    int v = data.domain.add_value(std::string(value));
    data.corpus.instances.push_back({b, v});
  };
  add(kSequenceStart, tokens[0]);
  for (std::size_t i = 1; i < tokens.size(); ++i) add(tokens[i - 1], tokens[i]);
  add(tokens[tokens.size() - 1], kSequenceEnd);
  return data;
}

CorpusData extract_window_instances(std::span<const std::string> tokens, int width) {
  if (width < 2) throw std::invalid_argument("window width must be at least 2");
  CorpusData data;
  const std::size_t n = tokens.size();
  if (n == 0) return data;
  auto add = [&](const std::string& head, const std::string& other) {
    int b = data.domain.add_bin(head);
    int v = data.domain.add_value(other);
    data.corpus.instances.push_back({b, v});
  };
  const std::size_t w = static_cast<std::size_t>(width);
  if (n < w) {
    for (std::size_t j = 1; j < n; ++j) add(tokens[0], tokens[j]);
    return data;
  }
  for (std::size_t anchor = 0; anchor + w <= n; ++anchor) {
    for (std::size_t j = 1; j < w; ++j) add(tokens[anchor], tokens[anchor + j]);
  }
  return data;
}

InstanceStats instance_stats(const CorpusData& data, std::int64_t declared_num_values) {
  if (declared_num_values < 1) {
    throw std::invalid_argument("declared value count must be at least 1");
  }
  InstanceStats stats;
  stats.m = static_cast<std::int64_t>(data.corpus.size());
  stats.declared_num_values = declared_num_values;

  std::vector<std::int64_t> counts(data.domain.num_bins(), 0);
  for (const Instance& inst : data.corpus.instances) ++counts[inst.bin];
  for (int b = 0; b < data.domain.num_bins(); ++b) {
    if (counts[b] > 0) stats.histogram.emplace_back(data.domain.bin_id(b), counts[b]);
  }
  stats.observed_bins = static_cast<std::int64_t>(stats.histogram.size());
  stats.slot_count =
      stats.observed_bins > 0 ? slots(stats.observed_bins, declared_num_values) : 0;
  stats.mean_instances_per_bin =
      stats.observed_bins > 0
          ? static_cast<double>(stats.m) / static_cast<double>(stats.observed_bins)
          : 0.0;
  return stats;
}

void save_instance_stats_json(const InstanceStats& stats, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["m"] = stats.m;
  doc["observed_bins"] = stats.observed_bins;
  doc["declared_num_values"] = stats.declared_num_values;
  doc["slot_count"] = stats.slot_count;
  doc["mean_instances_per_bin"] = stats.mean_instances_per_bin;
  nlohmann::ordered_json hist = nlohmann::ordered_json::object();
  for (const auto& [bin, count] : stats.histogram) hist[bin] = count;
  doc["histogram"] = std::move(hist);
  out << doc.dump(2) << '\n';
}

}  // namespace binlearn
