#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "binlearn/model.hpp"

namespace binlearn {

// one training observation: indices into a Domain
struct Instance {
  int bin;
  int value;
  bool operator==(const Instance&) const = default;
};

// ordered multiset of training instances
struct Corpus {
  std::vector<Instance> instances;
  std::int64_t size() const { return static_cast<std::int64_t>(instances.size()); }
};

// a corpus together with the symbol table it is indexed against
struct CorpusData {
  Domain domain;
  Corpus corpus;
};

enum class FallbackPolicy {
  UniformRandomValue,
  FixedDefaultValue,
  GlobalMode,
};

std::string_view policy_name(FallbackPolicy policy);
FallbackPolicy parse_policy(std::string_view name);

struct LearnedMap {
  std::vector<int> assignment;   // per bin; -1 where the bin had no instances
  FallbackPolicy fallback = FallbackPolicy::UniformRandomValue;
  int fallback_value = -1;       // resolved value for fixed-default / global-mode
  std::uint64_t seed = 0;
};

// instances landing in one bin, order preserved
std::vector<Instance> bin_instances(const Corpus& corpus, int bin);

std::int64_t value_frequency(int value, std::span<const Instance> instances);

// most-frequent-value map; ties resolved uniformly at random, driven by a
// deterministic generator keyed on (seed, bin id) so training order and
// parallel partitioning cannot change the result
LearnedMap train_mode(const Corpus& corpus, const Domain& domain, FallbackPolicy policy,
                      std::uint64_t seed, int default_value = -1);

struct MleTable {
  std::vector<std::vector<double>> rows;  // rows[b][v] = relative frequency
  std::vector<bool> defined;              // false where the bin had no instances
};

// relative-frequency estimate of the conditional table; no smoothing
MleTable train_mle(const Corpus& corpus, const Domain& domain);

// TSV: one "bin_id<TAB>value_id" per line
Corpus read_corpus_tsv(std::istream& in, const Domain& domain);
CorpusData read_corpus_tsv(std::istream& in);
void write_corpus_tsv(const Corpus& corpus, const Domain& domain, std::ostream& out);

// {"assignment": {...}, "fallback": ..., "seed": ...}
void save_learned_map_json(const LearnedMap& map, const Domain& domain, std::ostream& out);
LearnedMap load_learned_map_json(std::istream& in, const Domain& domain);

}  // namespace binlearn
