#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace binlearn {

// Indexed symbol tables for bins and values. Indices are dense and stable;
// ids are the external names used in files.
class Domain {
 public:
  Domain() = default;
  Domain(std::vector<std::string> bins, std::vector<std::string> values);

  int add_bin(const std::string& id);
  int add_value(const std::string& id);

  int num_bins() const { return static_cast<int>(bins_.size()); }
  int num_values() const { return static_cast<int>(values_.size()); }

  const std::string& bin_id(int index) const { return bins_.at(index); }
  const std::string& value_id(int index) const { return values_.at(index); }

  // -1 when absent
  int bin_index(const std::string& id) const;
  int value_index(const std::string& id) const;

  const std::vector<std::string>& bins() const { return bins_; }
  const std::vector<std::string>& values() const { return values_; }

 private:
  std::vector<std::string> bins_;
  std::vector<std::string> values_;
  std::unordered_map<std::string, int> bin_lookup_;
  std::unordered_map<std::string, int> value_lookup_;
};

// A processor abstracted as: input falls into a bin, output is a value,
// governed by Pr(bin) and Pr(value | bin).
struct ProcessorModel {
  Domain domain;
  std::vector<double> bin_probs;            // Pr(I = b)
  std::vector<std::vector<double>> cond;    // cond[b][v] = Pr(J = v | I = b)

  // probability of the most likely value in a bin, and its index (first max)
  double top_value_prob(int bin) const;
  int top_value(int bin) const;
};

// Total decision function bin -> value; entries are value indices, -1 = missing.
struct DecisionMap {
  std::vector<int> assignment;
};

struct ModelViolation {
  std::string where;     // field or "field[id]"
  std::string what;
  double residual = 0.0;
};

std::vector<ModelViolation> validate_model(const ProcessorModel& model);
bool is_valid(const ProcessorModel& model);

// number of independent decisions a map must encode
std::int64_t slots(std::int64_t num_bins, std::int64_t num_values);

// expected error of a decision map under the model
double expected_error_rate(const ProcessorModel& model, const DecisionMap& decision);

// error of the per-bin argmax decision map (the best any map can do)
double optimal_error_rate(const ProcessorModel& model);
DecisionMap optimal_decision(const ProcessorModel& model);

// JSON document shape:
//   {"values": ["v1", ...],
//    "bins": [{"id": "b1", "p": 0.5, "cond": {"v1": 0.9, ...}}, ...]}
ProcessorModel load_model_json(std::istream& in);
ProcessorModel load_model_file(const std::string& path);
void save_model_json(const ProcessorModel& model, std::ostream& out);

// explicit rescaling of bin_probs and cond rows; never applied implicitly
void renormalize(ProcessorModel& model);

}  // namespace binlearn
