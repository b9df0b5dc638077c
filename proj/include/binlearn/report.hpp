#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "binlearn/bounds.hpp"
#include "binlearn/model.hpp"
#include "binlearn/simulator.hpp"

namespace binlearn {

enum class Qualifier { Exact, Approx, AtLeast, AtMost };

std::string_view qualifier_name(Qualifier q);
Qualifier parse_qualifier(std::string_view name);

struct SystemSummary {
  std::string name;
  std::string training_source;
  std::int64_t m = 0;
  std::int64_t slot_count = 0;                  // L
  Qualifier m_qualifier = Qualifier::Exact;
  Qualifier slot_qualifier = Qualifier::Exact;
  double ratio = 0.0;                           // m / L
  Qualifier ratio_qualifier = Qualifier::Exact;
  std::optional<double> accuracy;
  std::optional<double> human_accuracy;
};

SystemSummary summarize_system(std::string name, std::string training_source, std::int64_t m,
                               std::int64_t slot_count,
                               Qualifier m_qualifier = Qualifier::Exact,
                               Qualifier slot_qualifier = Qualifier::Exact,
                               std::optional<double> accuracy = std::nullopt,
                               std::optional<double> human_accuracy = std::nullopt);

// fixture: {"systems": [{"name":..., "training_source":..., "m":..., "L":..., ...}]}
std::vector<SystemSummary> load_systems_json(std::istream& in);
std::vector<SystemSummary> load_systems_file(const std::string& path);

// rows ordered by descending ratio
void write_summaries_json(std::span<const SystemSummary> rows, std::ostream& out);
void write_summaries_csv(std::span<const SystemSummary> rows, std::ostream& out);

struct ReportRow {
  std::int64_t m = 0;
  double r_opt = 0.0;
  double corpus_bound = 0.0;
  double mc_mean = 0.0;
  double mc_stderr = 0.0;
  double w_exact = 0.0;
  double w_exp_bound = 0.0;
};

struct BundleReport {
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  std::string policy;
  std::vector<ReportRow> rows;
  std::vector<std::int64_t> bound_violations;  // m values where mc_mean > bound + 3*stderr
};

// bounds + Monte Carlo over an m-grid; deterministic given (model, grid,
// trials, seed) at any thread count
BundleReport report_bundle(const ProcessorModel& model, std::span<const std::int64_t> grid,
                           std::int64_t trials, std::uint64_t seed, FallbackPolicy policy,
                           int default_value = -1, bool conservative_fallback = false,
                           int threads = 1);

void write_bundle_json(const BundleReport& report, std::ostream& out);
void write_bundle_csv(const BundleReport& report, std::ostream& out);
BundleReport parse_bundle_json(std::istream& in);
std::vector<ReportRow> parse_bundle_csv(std::istream& in);

}  // namespace binlearn
