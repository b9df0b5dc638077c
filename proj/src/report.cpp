#include "binlearn/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "binlearn/numeric.hpp"
#include "binlearn/rng.hpp"

namespace binlearn {

namespace {

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double x = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("bad numeric field: " + std::string(text));
  }
  return x;
}

std::int64_t parse_int(std::string_view text) {
  std::int64_t x = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw std::runtime_error("bad integer field: " + std::string(text));
  }
  return x;
}

std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\n") == std::string_view::npos) return std::string(raw);
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// +1 pushes the ratio up, -1 down, 0 leaves it exact
int ratio_direction(Qualifier q, bool numerator) {
  int sign = numerator ? 1 : -1;
  switch (q) {
    case Qualifier::AtLeast: return sign;
    case Qualifier::AtMost: return -sign;
    default: return 0;
  }
}

nlohmann::ordered_json summary_to_json(const SystemSummary& row) {
  nlohmann::ordered_json obj;
  obj["name"] = row.name;
  obj["training_source"] = row.training_source;
  obj["m"] = row.m;
  obj["m_qualifier"] = qualifier_name(row.m_qualifier);
  obj["L"] = row.slot_count;
  obj["L_qualifier"] = qualifier_name(row.slot_qualifier);
  obj["ratio"] = row.ratio;
  obj["ratio_qualifier"] = qualifier_name(row.ratio_qualifier);
  if (row.accuracy) obj["accuracy"] = *row.accuracy;
  if (row.human_accuracy) obj["human_accuracy"] = *row.human_accuracy;
  return obj;
}

std::vector<SystemSummary> sorted_by_ratio(std::span<const SystemSummary> rows) {
  std::vector<SystemSummary> sorted(rows.begin(), rows.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const SystemSummary& a, const SystemSummary& b) { return a.ratio > b.ratio; });
  return sorted;
}

}  // namespace

std::string_view qualifier_name(Qualifier q) {
  switch (q) {
    case Qualifier::Exact: return "exact";
    case Qualifier::Approx: return "approx";
    case Qualifier::AtLeast: return "at_least";
    case Qualifier::AtMost: return "at_most";
  }
  throw std::logic_error("unreachable");
}

Qualifier parse_qualifier(std::string_view name) {
  if (name == "exact") return Qualifier::Exact;
  if (name == "approx") return Qualifier::Approx;
  if (name == "at_least") return Qualifier::AtLeast;
  if (name == "at_most") return Qualifier::AtMost;
  throw std::invalid_argument("unknown qualifier: " + std::string(name));
}

SystemSummary summarize_system(std::string name, std::string training_source, std::int64_t m,
                               std::int64_t slot_count, Qualifier m_qualifier,
                               Qualifier slot_qualifier, std::optional<double> accuracy,
                               std::optional<double> human_accuracy) {
  if (m <= 0 || slot_count <= 0) throw std::invalid_argument("m and L must be positive");
  SystemSummary row;
  row.name = std::move(name);
  row.training_source = std::move(training_source);
  row.m = m;
  row.slot_count = slot_count;
  row.m_qualifier = m_qualifier;
  row.slot_qualifier = slot_qualifier;
  row.ratio = static_cast<double>(m) / static_cast<double>(slot_count);
  row.accuracy = accuracy;
  row.human_accuracy = human_accuracy;

  if (m_qualifier == Qualifier::Approx || slot_qualifier == Qualifier::Approx) {
    row.ratio_qualifier = Qualifier::Approx;
  } else {
    int dm = ratio_direction(m_qualifier, true);
    int dl = ratio_direction(slot_qualifier, false);
    if (dm != 0 && dl != 0 && dm != dl) {
      row.ratio_qualifier = Qualifier::Approx;
    } else {
      int dir = dm != 0 ? dm : dl;
      row.ratio_qualifier =
          dir > 0 ? Qualifier::AtLeast : dir < 0 ? Qualifier::AtMost : Qualifier::Exact;
    }
  }
  return row;
}

std::vector<SystemSummary> load_systems_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("systems file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("systems") || !doc["systems"].is_array()) {
    throw std::runtime_error("systems file needs a top-level systems array");
  }
  std::vector<SystemSummary> rows;
  for (const auto& entry : doc["systems"]) {
    Qualifier mq = entry.contains("m_qualifier")
                       ? parse_qualifier(entry["m_qualifier"].get<std::string>())
                       : Qualifier::Exact;
    Qualifier lq = entry.contains("L_qualifier")
                       ? parse_qualifier(entry["L_qualifier"].get<std::string>())
                       : Qualifier::Exact;
    std::optional<double> accuracy;
    if (entry.contains("accuracy")) accuracy = entry["accuracy"].get<double>();
    std::optional<double> human;
    if (entry.contains("human_accuracy")) human = entry["human_accuracy"].get<double>();
    rows.push_back(summarize_system(entry.at("name").get<std::string>(),
                                    entry.at("training_source").get<std::string>(),
                                    entry.at("m").get<std::int64_t>(),
                                    entry.at("L").get<std::int64_t>(), mq, lq, accuracy, human));
  }
  return rows;
}

std::vector<SystemSummary> load_systems_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open systems file: " + path);
  return load_systems_json(in);
}

void write_summaries_json(std::span<const SystemSummary> rows, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["systems"] = nlohmann::ordered_json::array();
  for (const SystemSummary& row : sorted_by_ratio(rows)) {
    doc["systems"].push_back(summary_to_json(row));
  }
  out << doc.dump(2) << '\n';
}

void write_summaries_csv(std::span<const SystemSummary> rows, std::ostream& out) {
  out << "name,training_source,m,m_qualifier,L,L_qualifier,ratio,ratio_qualifier,"
         "accuracy,human_accuracy\n";
  for (const SystemSummary& row : sorted_by_ratio(rows)) {
    out << csv_field(row.name) << ',' << csv_field(row.training_source) << ',' << row.m << ','
        << qualifier_name(row.m_qualifier) << ',' << row.slot_count << ','
        << qualifier_name(row.slot_qualifier) << ',' << format_double(row.ratio) << ','
        << qualifier_name(row.ratio_qualifier) << ','
        << (row.accuracy ? format_double(*row.accuracy) : "") << ','
        << (row.human_accuracy ? format_double(*row.human_accuracy) : "") << '\n';
  }
}

BundleReport report_bundle(const ProcessorModel& model, std::span<const std::int64_t> grid,
                           std::int64_t trials, std::uint64_t seed, FallbackPolicy policy,
                           int default_value, bool conservative_fallback, int threads) {
  BundleReport report;
  report.seed = seed;
  report.trials = trials;
  report.policy = std::string(policy_name(policy));

  const std::vector<double> fallback =
      conservative_fallback ? conservative_fallback_errors(model)
                            : analytic_fallback_errors(model, policy, default_value);
  const double r_opt = optimal_error_rate(model);

  for (std::size_t i = 0; i < grid.size(); ++i) {
    const std::int64_t m = grid[i];
    if (m < 0) throw std::invalid_argument("grid entries must be non-negative");
    ReportRow row;
    row.m = m;
    row.r_opt = r_opt;
    if (m >= 1) {
      row.corpus_bound = corpus_error_bound(model, m, fallback);
    } else {
      CompensatedSum sum;
      for (int b = 0; b < model.domain.num_bins(); ++b) {
        sum.add(model.bin_probs[b] * fallback[b]);
      }
      row.corpus_bound = std::clamp(sum.value(), 0.0, 1.0);
    }
    SimulationResult mc = monte_carlo(model, m, trials, mix_seed(seed, static_cast<std::uint64_t>(i)),
                                      policy, default_value, threads);
    row.mc_mean = mc.mean_error;
    row.mc_stderr = mc.std_error;
    row.w_exact = empty_bin_mass_exact(model, m);
    row.w_exp_bound = empty_bin_mass_bounds(model.domain.num_bins(), m).second;
    if (row.mc_mean > row.corpus_bound + 3.0 * row.mc_stderr) {
      report.bound_violations.push_back(m);
    }
    report.rows.push_back(row);
  }
  return report;
}

void write_bundle_json(const BundleReport& report, std::ostream& out) {
  nlohmann::ordered_json doc;
  doc["seed"] = report.seed;
  doc["trials"] = report.trials;
  doc["policy"] = report.policy;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const ReportRow& row : report.rows) {
    nlohmann::ordered_json obj;
    obj["m"] = row.m;
    obj["r_opt"] = row.r_opt;
    obj["corpus_bound"] = row.corpus_bound;
    obj["mc_mean"] = row.mc_mean;
    obj["mc_stderr"] = row.mc_stderr;
    obj["w_exact"] = row.w_exact;
    obj["w_exp_bound"] = row.w_exp_bound;
    doc["rows"].push_back(std::move(obj));
  }
  doc["bound_violations"] = report.bound_violations;
  out << doc.dump(2) << '\n';
}

void write_bundle_csv(const BundleReport& report, std::ostream& out) {
  out << "m,r_opt,corpus_bound,mc_mean,mc_stderr,w_exact,w_exp_bound\n";
  for (const ReportRow& row : report.rows) {
    out << row.m << ',' << format_double(row.r_opt) << ',' << format_double(row.corpus_bound)
        << ',' << format_double(row.mc_mean) << ',' << format_double(row.mc_stderr) << ','
        << format_double(row.w_exact) << ',' << format_double(row.w_exp_bound) << '\n';
  }
}

BundleReport parse_bundle_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("bundle file is not valid JSON: ") + e.what());
  }
  BundleReport report;
  report.seed = doc.at("seed").get<std::uint64_t>();
  report.trials = doc.at("trials").get<std::int64_t>();
  report.policy = doc.at("policy").get<std::string>();
  for (const auto& obj : doc.at("rows")) {
    ReportRow row;
    row.m = obj.at("m").get<std::int64_t>();
    row.r_opt = obj.at("r_opt").get<double>();
    row.corpus_bound = obj.at("corpus_bound").get<double>();
    row.mc_mean = obj.at("mc_mean").get<double>();
    row.mc_stderr = obj.at("mc_stderr").get<double>();
    row.w_exact = obj.at("w_exact").get<double>();
    row.w_exp_bound = obj.at("w_exp_bound").get<double>();
    report.rows.push_back(row);
  }
  if (doc.contains("bound_violations")) {
    report.bound_violations = doc["bound_violations"].get<std::vector<std::int64_t>>();
  }
  return report;
}

std::vector<ReportRow> parse_bundle_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    auto fields = split_line(line);
    if (fields.size() != 7) throw std::runtime_error("bundle row needs 7 fields: " + line);
    ReportRow row;
    row.m = parse_int(fields[0]);
    row.r_opt = parse_double(fields[1]);
    row.corpus_bound = parse_double(fields[2]);
    row.mc_mean = parse_double(fields[3]);
    row.mc_stderr = parse_double(fields[4]);
    row.w_exact = parse_double(fields[5]);
    row.w_exp_bound = parse_double(fields[6]);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace binlearn
