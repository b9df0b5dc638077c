#include <charconv>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "binlearn/bounds.hpp"
#include "binlearn/ingest.hpp"
#include "binlearn/model.hpp"
#include "binlearn/report.hpp"
#include "binlearn/simulator.hpp"

namespace {

using namespace binlearn;

struct CliError {
  int code;
  std::string message;
};

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "json";
};

struct ModelOpts {
  std::string path;
  bool renormalize = false;
  std::string policy = "uniform-random-value";
  std::string default_value;
  bool conservative = false;
};

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, ptr);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw CliError{1, "cannot open output file: " + path};
  out << text;
}

ProcessorModel load_checked_model(const ModelOpts& opts) {
  std::ifstream in(opts.path);
  if (!in) throw CliError{1, "cannot open model file: " + opts.path};
  ProcessorModel model;
  try {
    model = load_model_json(in);
  } catch (const std::exception& e) {
    throw CliError{2, e.what()};
  }
  if (opts.renormalize) renormalize(model);
  auto violations = validate_model(model);
  if (!violations.empty()) {
    std::string message = "model failed validation:";
    for (const auto& v : violations) message += "\n  " + v.where + ": " + v.what;
    throw CliError{2, message};
  }
  return model;
}

FallbackPolicy resolve_policy(const ModelOpts& opts) {
  try {
    return parse_policy(opts.policy);
  } catch (const std::exception& e) {
    throw CliError{1, e.what()};
  }
}

int resolve_default_value(const ModelOpts& opts, const ProcessorModel& model,
                          FallbackPolicy policy) {
  if (opts.default_value.empty()) {
    if (policy == FallbackPolicy::FixedDefaultValue) {
      throw CliError{1, "fixed-default-value policy needs --default-value"};
    }
    return -1;
  }
  int v = model.domain.value_index(opts.default_value);
  if (v < 0) throw CliError{1, "unknown value id: " + opts.default_value};
  return v;
}

std::vector<double> resolve_fallback(const ModelOpts& opts, const ProcessorModel& model,
                                     FallbackPolicy policy, int default_value) {
  return opts.conservative ? conservative_fallback_errors(model)
                           : analytic_fallback_errors(model, policy, default_value);
}

nlohmann::ordered_json bound_report_json(const BoundReport& report) {
  nlohmann::ordered_json doc;
  doc["m"] = report.m;
  doc["w_exact"] = report.w_exact;
  doc["w_finite_bound"] = report.w_finite_bound;
  doc["w_exp_bound"] = report.w_exp_bound;
  doc["corpus_bound"] = report.corpus_bound;
  doc["r_opt"] = report.r_opt;
  doc["per_bin"] = nlohmann::ordered_json::array();
  for (const PerBinBound& row : report.per_bin) {
    nlohmann::ordered_json obj;
    obj["bin"] = row.bin;
    obj["top_prob"] = row.top_prob;
    obj["floor_error"] = row.floor_error;
    obj["u1"] = row.u1;
    obj["u3"] = row.u3;
    obj["u5"] = row.u5;
    doc["per_bin"].push_back(std::move(obj));
  }
  return doc;
}

void add_model_opts(CLI::App* sub, ModelOpts& opts, bool with_policy) {
  sub->add_option("--model", opts.path, "model JSON file")->required();
  sub->add_flag("--renormalize", opts.renormalize, "rescale probabilities before validation");
  if (with_policy) {
    sub->add_option("--policy", opts.policy,
                    "fallback for untrained bins: uniform-random-value, "
                    "fixed-default-value, or global-mode");
    sub->add_option("--default-value", opts.default_value,
                    "value id used by fixed-default-value");
  }
}

double corpus_bound_at(const ProcessorModel& model, std::int64_t m,
                       const std::vector<double>& fallback) {
  if (m >= 1) return corpus_error_bound(model, m, fallback);
  double sum = 0.0;
  for (int b = 0; b < model.domain.num_bins(); ++b) sum += model.bin_probs[b] * fallback[b];
  return std::min(1.0, std::max(0.0, sum));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"workbench for bin/value decision processors: exact error rates, "
               "learning-curve bounds, Monte Carlo simulation, corpus accounting"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts global;
  app.add_option("--seed", global.seed, "root random seed")->capture_default_str();
  app.add_option("--out", global.out, "output path (default: stdout)");
  app.add_option("--format", global.format, "output format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();

  int exit_code = 0;

  // validate
  ModelOpts validate_opts;
  auto* validate_cmd = app.add_subcommand("validate", "check a model file's probabilities");
  validate_cmd->add_option("--model", validate_opts.path, "model JSON file")->required();
  validate_cmd->add_flag("--renormalize", validate_opts.renormalize,
                         "rescale probabilities before checking");
  validate_cmd->callback([&] {
    std::ifstream in(validate_opts.path);
    if (!in) throw CliError{1, "cannot open model file: " + validate_opts.path};
    ProcessorModel model;
    try {
      model = load_model_json(in);
    } catch (const std::exception& e) {
      throw CliError{2, e.what()};
    }
    if (validate_opts.renormalize) renormalize(model);
    auto violations = validate_model(model);

    nlohmann::ordered_json doc;
    doc["valid"] = violations.empty();
    doc["bins"] = model.domain.num_bins();
    doc["values"] = model.domain.num_values();
    if (violations.empty()) {
      doc["slots"] = slots(model.domain.num_bins(), model.domain.num_values());
      doc["r_opt"] = optimal_error_rate(model);
      if (validate_opts.renormalize) {
        std::ostringstream repaired;
        save_model_json(model, repaired);
        doc["model"] = nlohmann::ordered_json::parse(repaired.str());
      }
    } else {
      doc["violations"] = nlohmann::ordered_json::array();
      for (const auto& v : violations) {
        doc["violations"].push_back({{"where", v.where}, {"what", v.what},
                                     {"residual", v.residual}});
      }
    }
    write_text(global.out, doc.dump(2) + "\n");
    if (!violations.empty()) exit_code = 2;
  });

  // bounds
  ModelOpts bounds_opts;
  std::int64_t bounds_m = 1;
  auto* bounds_cmd = app.add_subcommand("bounds", "error-bound report for one corpus size");
  add_model_opts(bounds_cmd, bounds_opts, true);
  bounds_cmd->add_option("--m", bounds_m, "corpus size")->required()
      ->check(CLI::PositiveNumber);
  bounds_cmd->add_flag("--conservative", bounds_opts.conservative,
                       "assume fallback decisions are always wrong");
  bounds_cmd->callback([&] {
    ProcessorModel model = load_checked_model(bounds_opts);
    FallbackPolicy policy = resolve_policy(bounds_opts);
    int default_value = resolve_default_value(bounds_opts, model, policy);
    auto fallback = resolve_fallback(bounds_opts, model, policy, default_value);
    BoundReport report = make_bound_report(model, bounds_m, fallback);
    if (global.format == "csv") {
      std::string text = "bin,top_prob,floor_error,u1,u3,u5\n";
      for (const PerBinBound& row : report.per_bin) {
        text += row.bin + ',' + format_double(row.top_prob) + ',' +
                format_double(row.floor_error) + ',' + format_double(row.u1) + ',' +
                format_double(row.u3) + ',' + format_double(row.u5) + '\n';
      }
      write_text(global.out, text);
    } else {
      write_text(global.out, bound_report_json(report).dump(2) + "\n");
    }
  });

  // curves
  ModelOpts curves_opts;
  std::vector<std::int64_t> curves_grid;
  auto* curves_cmd = app.add_subcommand("curves", "bound curves over a corpus-size grid");
  add_model_opts(curves_cmd, curves_opts, true);
  curves_cmd->add_option("--grid", curves_grid, "comma-separated corpus sizes")
      ->required()
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  curves_cmd->add_flag("--conservative", curves_opts.conservative,
                       "assume fallback decisions are always wrong");
  curves_cmd->callback([&] {
    ProcessorModel model = load_checked_model(curves_opts);
    FallbackPolicy policy = resolve_policy(curves_opts);
    int default_value = resolve_default_value(curves_opts, model, policy);
    auto fallback = resolve_fallback(curves_opts, model, policy, default_value);
    const double r_opt = optimal_error_rate(model);
    const std::int64_t num_bins = model.domain.num_bins();

    if (global.format == "csv") {
      std::string text = "m,w_exact,w_finite,w_exp,corpus_bound,r_opt\n";
      for (std::int64_t m : curves_grid) {
        auto [w_finite, w_exp] = empty_bin_mass_bounds(num_bins, m);
        text += std::to_string(m) + ',' + format_double(empty_bin_mass_exact(model, m)) + ',' +
                format_double(w_finite) + ',' + format_double(w_exp) + ',' +
                format_double(corpus_bound_at(model, m, fallback)) + ',' +
                format_double(r_opt) + '\n';
      }
      write_text(global.out, text);
    } else {
      nlohmann::ordered_json doc;
      doc["rows"] = nlohmann::ordered_json::array();
      for (std::int64_t m : curves_grid) {
        auto [w_finite, w_exp] = empty_bin_mass_bounds(num_bins, m);
        nlohmann::ordered_json row;
        row["m"] = m;
        row["w_exact"] = empty_bin_mass_exact(model, m);
        row["w_finite"] = w_finite;
        row["w_exp"] = w_exp;
        row["corpus_bound"] = corpus_bound_at(model, m, fallback);
        row["r_opt"] = r_opt;
        doc["rows"].push_back(std::move(row));
      }
      write_text(global.out, doc.dump(2) + "\n");
    }
  });

  // simulate
  ModelOpts simulate_opts;
  std::int64_t simulate_m = 0;
  std::int64_t simulate_trials = 1000;
  int simulate_threads = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo sample-train-evaluate runs");
  add_model_opts(simulate_cmd, simulate_opts, true);
  simulate_cmd->add_option("--m", simulate_m, "corpus size per trial")
      ->required()
      ->check(CLI::NonNegativeNumber);
  simulate_cmd->add_option("--trials", simulate_trials, "number of trials")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--threads", simulate_threads, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  simulate_cmd->callback([&] {
    ProcessorModel model = load_checked_model(simulate_opts);
    FallbackPolicy policy = resolve_policy(simulate_opts);
    int default_value = resolve_default_value(simulate_opts, model, policy);
    SimulationResult result = monte_carlo(model, simulate_m, simulate_trials, global.seed,
                                          policy, default_value, simulate_threads);
    if (global.format == "csv") {
      std::string text = "m,trials,mean_error,std_error,empty_bin_hit_rate\n";
      text += std::to_string(result.m) + ',' + std::to_string(result.trials) + ',' +
              format_double(result.mean_error) + ',' + format_double(result.std_error) + ',' +
              format_double(result.empty_bin_hit_rate) + '\n';
      write_text(global.out, text);
    } else {
      std::ostringstream buffer;
      save_simulation_json(result, buffer);
      write_text(global.out, buffer.str());
    }
  });

  // oracle
  ModelOpts oracle_opts;
  int oracle_m = 0;
  auto* oracle_cmd = app.add_subcommand("oracle", "exact expected error by full enumeration");
  add_model_opts(oracle_cmd, oracle_opts, true);
  oracle_cmd->add_option("--m", oracle_m, "corpus size")
      ->required()
      ->check(CLI::NonNegativeNumber);
  oracle_cmd->callback([&] {
    ProcessorModel model = load_checked_model(oracle_opts);
    FallbackPolicy policy = resolve_policy(oracle_opts);
    int default_value = resolve_default_value(oracle_opts, model, policy);
    double expected = brute_force_expected_error(model, oracle_m, policy, default_value);
    if (global.format == "csv") {
      write_text(global.out, "m,policy,expected_error\n" + std::to_string(oracle_m) + ',' +
                                 std::string(policy_name(policy)) + ',' +
                                 format_double(expected) + '\n');
    } else {
      nlohmann::ordered_json doc;
      doc["m"] = oracle_m;
      doc["policy"] = std::string(policy_name(policy));
      doc["expected_error"] = expected;
      write_text(global.out, doc.dump(2) + "\n");
    }
  });

  // ingest
  std::string ingest_scheme;
  int ingest_width = 10;
  std::string ingest_in;
  std::string ingest_stats;
  std::int64_t ingest_declared = 0;
  auto* ingest_cmd = app.add_subcommand("ingest", "turn raw text into a training corpus");
  ingest_cmd->add_option("--scheme", ingest_scheme, "instance extraction scheme")
      ->required()
      ->check(CLI::IsMember({"bigram", "window"}));
  ingest_cmd->add_option("--width", ingest_width, "window width (window scheme)")
      ->capture_default_str()
      ->check(CLI::Range(2, 1 << 20));
  ingest_cmd->add_option("--in", ingest_in, "input text file")->required();
  ingest_cmd->add_option("--stats", ingest_stats, "also write instance statistics JSON here");
  ingest_cmd->add_option("--declared-values", ingest_declared,
                         "value-set size used for slot accounting (default: observed)")
      ->check(CLI::PositiveNumber);
  ingest_cmd->callback([&] {
    std::ifstream in(ingest_in);
    if (!in) throw CliError{1, "cannot open input file: " + ingest_in};
    std::ostringstream raw;
    raw << in.rdbuf();
    TokenStream tokens = tokenize(raw.str());
    CorpusData data = ingest_scheme == "bigram"
                          ? extract_bigram_instances(tokens)
                          : extract_window_instances(tokens, ingest_width);
    std::ostringstream tsv;
    write_corpus_tsv(data.corpus, data.domain, tsv);
    write_text(global.out, tsv.str());
    if (!ingest_stats.empty()) {
      std::int64_t declared =
          ingest_declared > 0 ? ingest_declared
                              : std::max<std::int64_t>(1, data.domain.num_values());
      InstanceStats stats = instance_stats(data, declared);
      std::ostringstream buffer;
      save_instance_stats_json(stats, buffer);
      write_text(ingest_stats, buffer.str());
    }
  });

  // summarize
  std::string summarize_systems;
  auto* summarize_cmd =
      app.add_subcommand("summarize", "training-data accounting table for known systems");
  summarize_cmd->add_option("--systems", summarize_systems, "systems JSON file")->required();
  summarize_cmd->callback([&] {
    std::ifstream in(summarize_systems);
    if (!in) throw CliError{1, "cannot open systems file: " + summarize_systems};
    std::vector<SystemSummary> rows;
    try {
      rows = load_systems_json(in);
    } catch (const std::exception& e) {
      throw CliError{2, e.what()};
    }
    std::ostringstream buffer;
    if (global.format == "csv") {
      write_summaries_csv(rows, buffer);
    } else {
      write_summaries_json(rows, buffer);
    }
    write_text(global.out, buffer.str());
  });

  // report
  ModelOpts report_opts;
  std::vector<std::int64_t> report_grid;
  std::int64_t report_trials = 1000;
  int report_threads = 1;
  std::string report_json_path;
  std::string report_csv_path;
  auto* report_cmd =
      app.add_subcommand("report", "bounds plus Monte Carlo comparison over a corpus-size grid");
  add_model_opts(report_cmd, report_opts, true);
  report_cmd->add_option("--grid", report_grid, "comma-separated corpus sizes")
      ->required()
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  report_cmd->add_option("--trials", report_trials, "trials per grid point")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  report_cmd->add_option("--threads", report_threads, "worker threads")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  report_cmd->add_flag("--conservative", report_opts.conservative,
                       "assume fallback decisions are always wrong");
  report_cmd->add_option("--json", report_json_path, "write the JSON report here");
  report_cmd->add_option("--csv", report_csv_path, "write the CSV report here");
  report_cmd->callback([&] {
    ProcessorModel model = load_checked_model(report_opts);
    FallbackPolicy policy = resolve_policy(report_opts);
    int default_value = resolve_default_value(report_opts, model, policy);
    BundleReport report =
        report_bundle(model, report_grid, report_trials, global.seed, policy, default_value,
                      report_opts.conservative, report_threads);
    std::ostringstream json_buffer;
    write_bundle_json(report, json_buffer);
    std::ostringstream csv_buffer;
    write_bundle_csv(report, csv_buffer);
    if (report_json_path.empty() && report_csv_path.empty()) {
      write_text(global.out, global.format == "csv" ? csv_buffer.str() : json_buffer.str());
    } else {
      if (!report_json_path.empty()) write_text(report_json_path, json_buffer.str());
      if (!report_csv_path.empty()) write_text(report_csv_path, csv_buffer.str());
    }
    if (!report.bound_violations.empty()) {
      std::string ms;
      for (std::int64_t m : report.bound_violations) {
        if (!ms.empty()) ms += ", ";
        ms += std::to_string(m);
      }
      std::cerr << "BOUND VIOLATION: mean error exceeds the bound at m = " << ms << '\n';
      exit_code = 3;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const CliError& e) {
    std::cerr << e.message << '\n';
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return 1;
  }
  return exit_code;
}
