#include "binlearn/learner.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "binlearn/rng.hpp"

namespace binlearn {

namespace {

// dense tally while |B|*|V| stays small; hashed otherwise (word-level domains)
constexpr std::int64_t kDenseCellLimit = 1 << 22;

void check_domain(const Corpus& corpus, const Domain& domain) {
  const int num_bins = domain.num_bins();
  const int num_values = domain.num_values();
  for (const Instance& inst : corpus.instances) {
    if (inst.bin < 0 || inst.bin >= num_bins || inst.value < 0 || inst.value >= num_values) {
      throw std::runtime_error("domain mismatch");
    }
  }
}

// calls fn(bin, counts_row) for every non-empty bin in ascending bin order;
// counts_row is dense over values
template <typename Fn>
void for_each_trained_bin(const Corpus& corpus, const Domain& domain, Fn&& fn) {
  const int num_bins = domain.num_bins();
  const int num_values = domain.num_values();
  const std::int64_t cells = static_cast<std::int64_t>(num_bins) * num_values;

  if (cells <= kDenseCellLimit) {
    std::vector<std::int64_t> counts(static_cast<std::size_t>(cells), 0);
    std::vector<std::int64_t> bin_totals(num_bins, 0);
    for (const Instance& inst : corpus.instances) {
      ++counts[static_cast<std::size_t>(inst.bin) * num_values + inst.value];
      ++bin_totals[inst.bin];
    }
    std::vector<std::int64_t> row(num_values);
    for (int b = 0; b < num_bins; ++b) {
      if (bin_totals[b] == 0) continue;
      std::copy_n(counts.begin() + static_cast<std::size_t>(b) * num_values, num_values,
                  row.begin());
      fn(b, row);
    }
    return;
  }

  std::unordered_map<std::int64_t, std::int64_t> counts;
  counts.reserve(corpus.instances.size());
  for (const Instance& inst : corpus.instances) {
    ++counts[static_cast<std::int64_t>(inst.bin) * num_values + inst.value];
  }
  std::unordered_map<int, std::vector<std::pair<int, std::int64_t>>> by_bin;
  for (const auto& [key, count] : counts) {
    by_bin[static_cast<int>(key / num_values)].emplace_back(static_cast<int>(key % num_values),
                                                            count);
  }
  std::vector<int> bins;
  bins.reserve(by_bin.size());
  for (const auto& [b, _] : by_bin) bins.push_back(b);
  std::sort(bins.begin(), bins.end());
  std::vector<std::int64_t> row(num_values);
  for (int b : bins) {
    std::fill(row.begin(), row.end(), 0);
    for (const auto& [v, count] : by_bin[b]) row[v] = count;
    fn(b, row);
  }
}

int pick_tied(const std::vector<int>& tied, std::uint64_t seed, std::uint64_t salt) {
  if (tied.size() == 1) return tied.front();
  SplitMix64 g(mix_seed(seed, salt));
  return tied[static_cast<std::size_t>(g.next_below(tied.size()))];
}

std::vector<int> argmax_set(const std::vector<std::int64_t>& counts) {
  std::int64_t best = 0;
  for (std::int64_t c : counts) best = std::max(best, c);
  std::vector<int> tied;
  for (int v = 0; v < static_cast<int>(counts.size()); ++v) {
    if (counts[v] == best) tied.push_back(v);
  }
  return tied;
}

}  // namespace

std::string_view policy_name(FallbackPolicy policy) {
  switch (policy) {
    case FallbackPolicy::UniformRandomValue: return "uniform-random-value";
    case FallbackPolicy::FixedDefaultValue: return "fixed-default-value";
    case FallbackPolicy::GlobalMode: return "global-mode";
  }
  throw std::logic_error("unreachable");
}

FallbackPolicy parse_policy(std::string_view name) {
  if (name == "uniform-random-value" || name == "uniform") return FallbackPolicy::UniformRandomValue;
  if (name == "fixed-default-value" || name == "fixed") return FallbackPolicy::FixedDefaultValue;
  if (name == "global-mode" || name == "global") return FallbackPolicy::GlobalMode;
  throw std::invalid_argument("unknown fallback policy: " + std::string(name));
}

std::vector<Instance> bin_instances(const Corpus& corpus, int bin) {
  std::vector<Instance> out;
  for (const Instance& inst : corpus.instances) {
    if (inst.bin == bin) out.push_back(inst);
  }
  return out;
}

std::int64_t value_frequency(int value, std::span<const Instance> instances) {
  std::int64_t count = 0;
  for (const Instance& inst : instances) {
    if (inst.value == value) ++count;
  }
  return count;
}

LearnedMap train_mode(const Corpus& corpus, const Domain& domain, FallbackPolicy policy,
                      std::uint64_t seed, int default_value) {
  const int num_values = domain.num_values();
  if (policy == FallbackPolicy::FixedDefaultValue &&
      (default_value < 0 || default_value >= num_values)) {
    throw std::invalid_argument("fixed-default-value policy needs a value from the domain");
  }
  check_domain(corpus, domain);

  LearnedMap map;
  map.assignment.assign(domain.num_bins(), -1);
  map.fallback = policy;
  map.seed = seed;

  for_each_trained_bin(corpus, domain, [&](int b, const std::vector<std::int64_t>& row) {
    std::int64_t best = 0;
    for (std::int64_t c : row) best = std::max(best, c);
    std::vector<int> tied;
    for (int v = 0; v < num_values; ++v) {
      if (row[v] == best) tied.push_back(v);
    }
    map.assignment[b] = pick_tied(tied, seed, fnv1a64(domain.bin_id(b)));
  });

  if (policy == FallbackPolicy::FixedDefaultValue) {
    map.fallback_value = default_value;
  } else if (policy == FallbackPolicy::GlobalMode) {
    std::vector<std::int64_t> value_counts(num_values, 0);
    for (const Instance& inst : corpus.instances) ++value_counts[inst.value];
    map.fallback_value = pick_tied(argmax_set(value_counts), seed, fnv1a64("global-mode"));
  }
  return map;
}

MleTable train_mle(const Corpus& corpus, const Domain& domain) {
  check_domain(corpus, domain);
  MleTable table;
  table.rows.assign(domain.num_bins(), std::vector<double>(domain.num_values(), 0.0));
  table.defined.assign(domain.num_bins(), false);
  for_each_trained_bin(corpus, domain, [&](int b, const std::vector<std::int64_t>& row) {
    std::int64_t total = 0;
    for (std::int64_t c : row) total += c;
    for (int v = 0; v < domain.num_values(); ++v) {
      table.rows[b][v] = static_cast<double>(row[v]) / static_cast<double>(total);
    }
    table.defined[b] = true;
  });
  return table;
}

Corpus read_corpus_tsv(std::istream& in, const Domain& domain) {
  Corpus corpus;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": expected bin<TAB>value");
    }
    const std::string bin_id = line.substr(0, tab);
    const std::string value_id = line.substr(tab + 1);
    int b = domain.bin_index(bin_id);
    int v = domain.value_index(value_id);
    if (b < 0 || v < 0) {
      throw std::runtime_error("domain mismatch: line " + std::to_string(line_no));
    }
    corpus.instances.push_back({b, v});
  }
  return corpus;
}

CorpusData read_corpus_tsv(std::istream& in) {
  CorpusData data;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error("corpus line " + std::to_string(line_no) +
                               ": expected bin<TAB>value");
    }
    int b = data.domain.add_bin(line.substr(0, tab));
    int v = data.domain.add_value(line.substr(tab + 1));
    data.corpus.instances.push_back({b, v});
  }
  return data;
}

void write_corpus_tsv(const Corpus& corpus, const Domain& domain, std::ostream& out) {
  for (const Instance& inst : corpus.instances) {
    out << domain.bin_id(inst.bin) << '\t' << domain.value_id(inst.value) << '\n';
  }
}

void save_learned_map_json(const LearnedMap& map, const Domain& domain, std::ostream& out) {
  nlohmann::ordered_json doc;
  auto& assignment = doc["assignment"] = nlohmann::ordered_json::object();
  for (int b = 0; b < static_cast<int>(map.assignment.size()); ++b) {
    if (map.assignment[b] >= 0) {
      assignment[domain.bin_id(b)] = domain.value_id(map.assignment[b]);
    }
  }
  doc["fallback"] = policy_name(map.fallback);
  doc["seed"] = map.seed;
  if (map.fallback_value >= 0) doc["fallback_value"] = domain.value_id(map.fallback_value);
  out << doc.dump(2) << '\n';
}

LearnedMap load_learned_map_json(std::istream& in, const Domain& domain) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("learned map is not valid JSON: ") + e.what());
  }
  LearnedMap map;
  map.assignment.assign(domain.num_bins(), -1);
  for (const auto& [bin_id, value_id] : doc.at("assignment").items()) {
    int b = domain.bin_index(bin_id);
    int v = domain.value_index(value_id.get<std::string>());
    if (b < 0 || v < 0) throw std::runtime_error("domain mismatch");
    map.assignment[b] = v;
  }
  map.fallback = parse_policy(doc.at("fallback").get<std::string>());
  map.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("fallback_value")) {
    int v = domain.value_index(doc.at("fallback_value").get<std::string>());
    if (v < 0) throw std::runtime_error("domain mismatch");
    map.fallback_value = v;
  }
  return map;
}

}  // namespace binlearn
