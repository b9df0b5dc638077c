#include "binlearn/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "binlearn/numeric.hpp"

namespace binlearn {

namespace {

constexpr double kProbTolerance = 1e-9;

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, end);
}

}  // namespace

Domain::Domain(std::vector<std::string> bins, std::vector<std::string> values) {
  for (auto& b : bins) add_bin(b);
  for (auto& v : values) add_value(v);
}

int Domain::add_bin(const std::string& id) {
  auto [it, inserted] = bin_lookup_.try_emplace(id, num_bins());
  if (inserted) bins_.push_back(id);
  return it->second;
}

int Domain::add_value(const std::string& id) {
  auto [it, inserted] = value_lookup_.try_emplace(id, num_values());
  if (inserted) values_.push_back(id);
  return it->second;
}

int Domain::bin_index(const std::string& id) const {
  auto it = bin_lookup_.find(id);
  return it == bin_lookup_.end() ? -1 : it->second;
}

int Domain::value_index(const std::string& id) const {
  auto it = value_lookup_.find(id);
  return it == value_lookup_.end() ? -1 : it->second;
}

double ProcessorModel::top_value_prob(int bin) const {
  const auto& row = cond.at(bin);
  double best = 0.0;
  for (double p : row) best = std::max(best, p);
  return best;
}

int ProcessorModel::top_value(int bin) const {
  const auto& row = cond.at(bin);
  int best = 0;
  for (int v = 1; v < static_cast<int>(row.size()); ++v) {
    if (row[v] > row[best]) best = v;
  }
  return best;
}

std::vector<ModelViolation> validate_model(const ProcessorModel& model) {
  std::vector<ModelViolation> out;
  const int num_bins = model.domain.num_bins();
  const int num_values = model.domain.num_values();

  if (num_bins < 1) out.push_back({"bins", "at least 1 bin required", 0.0});
  if (num_values < 2) {
    out.push_back({"values", "at least 2 values required", static_cast<double>(num_values)});
  }
  if (static_cast<int>(model.bin_probs.size()) != num_bins) {
    out.push_back({"bin_probs", "entry count does not match bins",
                   static_cast<double>(model.bin_probs.size()) - num_bins});
    return out;
  }
  if (static_cast<int>(model.cond.size()) != num_bins) {
    out.push_back({"cond", "row count does not match bins",
                   static_cast<double>(model.cond.size()) - num_bins});
    return out;
  }

  CompensatedSum total;
  for (int b = 0; b < num_bins; ++b) {
    double p = model.bin_probs[b];
    if (p < 0.0 || !std::isfinite(p)) {
      out.push_back({"bin_probs[" + model.domain.bin_id(b) + "]",
                     "probability " + format_double(p) + " out of range", p});
    }
    total.add(p);
  }
  double bin_residual = total.value() - 1.0;
  if (std::abs(bin_residual) > kProbTolerance) {
    out.push_back({"bin_probs", "sum " + format_double(total.value()), bin_residual});
  }

  for (int b = 0; b < num_bins; ++b) {
    const auto& row = model.cond[b];
    const std::string where = "cond[" + model.domain.bin_id(b) + "]";
    if (static_cast<int>(row.size()) != num_values) {
      out.push_back({where, "entry count does not match values",
                     static_cast<double>(row.size()) - num_values});
      continue;
    }
    CompensatedSum row_sum;
    for (int v = 0; v < num_values; ++v) {
      double p = row[v];
      if (p < 0.0 || !std::isfinite(p)) {
        out.push_back({where + "[" + model.domain.value_id(v) + "]",
                       "probability " + format_double(p) + " out of range", p});
      }
      row_sum.add(p);
    }
    double residual = row_sum.value() - 1.0;
    if (std::abs(residual) > kProbTolerance) {
      out.push_back({where, "sum " + format_double(row_sum.value()), residual});
    }
  }
  return out;
}

bool is_valid(const ProcessorModel& model) { return validate_model(model).empty(); }

std::int64_t slots(std::int64_t num_bins, std::int64_t num_values) {
  if (num_bins < 1 || num_values < 1) {
    throw std::invalid_argument("slots: need num_bins >= 1 and num_values >= 1");
  }
  return num_bins * (num_values - 1);
}

double expected_error_rate(const ProcessorModel& model, const DecisionMap& decision) {
  const int num_bins = model.domain.num_bins();
  const int num_values = model.domain.num_values();
  if (static_cast<int>(decision.assignment.size()) != num_bins) {
    throw std::invalid_argument("incomplete decision map");
  }
  CompensatedSum acc;
  for (int b = 0; b < num_bins; ++b) {
    int v = decision.assignment[b];
    if (v < 0) throw std::invalid_argument("incomplete decision map");
    if (v >= num_values) throw std::invalid_argument("decision map names an unknown value");
    acc.add(model.bin_probs[b] * (1.0 - model.cond[b][v]));
  }
  return acc.value();
}

double optimal_error_rate(const ProcessorModel& model) {
  CompensatedSum acc;
  for (int b = 0; b < model.domain.num_bins(); ++b) {
    acc.add(model.bin_probs[b] * (1.0 - model.top_value_prob(b)));
  }
  return acc.value();
}

DecisionMap optimal_decision(const ProcessorModel& model) {
  DecisionMap out;
  out.assignment.resize(model.domain.num_bins());
  for (int b = 0; b < model.domain.num_bins(); ++b) out.assignment[b] = model.top_value(b);
  return out;
}

ProcessorModel load_model_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("values") || !doc.contains("bins")) {
    throw std::runtime_error("model file needs top-level \"values\" and \"bins\"");
  }

  ProcessorModel model;
  for (const auto& v : doc.at("values")) {
    const std::string id = v.get<std::string>();
    if (model.domain.value_index(id) >= 0) {
      throw std::runtime_error("duplicate value id '" + id + "'");
    }
    model.domain.add_value(id);
  }
  const int num_values = model.domain.num_values();

  for (const auto& bin : doc.at("bins")) {
    const std::string id = bin.at("id").get<std::string>();
    if (model.domain.bin_index(id) >= 0) {
      throw std::runtime_error("duplicate bin id '" + id + "'");
    }
    model.domain.add_bin(id);
    model.bin_probs.push_back(bin.at("p").get<double>());
    std::vector<double> row(num_values, 0.0);
    for (const auto& [value_id, prob] : bin.at("cond").items()) {
      int v = model.domain.value_index(value_id);
      if (v < 0) {
        throw std::runtime_error("bin '" + id + "' references unknown value '" + value_id + "'");
      }
      row[v] = prob.get<double>();
    }
    model.cond.push_back(std::move(row));
  }
  return model;
}

ProcessorModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model file: " + path);
  return load_model_json(in);
}

void save_model_json(const ProcessorModel& model, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["values"] = model.domain.values();
  auto& bins = doc["bins"] = nlohmann::ordered_json::array();
  for (int b = 0; b < model.domain.num_bins(); ++b) {
    nlohmann::ordered_json entry;
    entry["id"] = model.domain.bin_id(b);
    entry["p"] = model.bin_probs[b];
    nlohmann::ordered_json cond;
    for (int v = 0; v < model.domain.num_values(); ++v) {
      cond[model.domain.value_id(v)] = model.cond[b][v];
    }
    entry["cond"] = std::move(cond);
    bins.push_back(std::move(entry));
  }
  out << doc.dump(2) << '\n';
}

void renormalize(ProcessorModel& model) {
  CompensatedSum total;
  for (double p : model.bin_probs) total.add(p);
  if (total.value() > 0.0) {
    for (double& p : model.bin_probs) p /= total.value();
  }
  for (auto& row : model.cond) {
    CompensatedSum row_sum;
    for (double p : row) row_sum.add(p);
    if (row_sum.value() > 0.0) {
      for (double& p : row) p /= row_sum.value();
    }
  }
}

}  // namespace binlearn
