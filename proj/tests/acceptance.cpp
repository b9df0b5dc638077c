// Acceptance checks for the workbench: one pass/fail line per criterion.
// Usage: binlearn_acceptance [path-to-cli-binary]
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "binlearn/bounds.hpp"
#include "binlearn/ingest.hpp"
#include "binlearn/report.hpp"
#include "binlearn/rng.hpp"
#include "binlearn/simulator.hpp"
#include "test_util.hpp"

using namespace binlearn;
using testutil::make_model;
using testutil::random_model;
using testutil::random_simplex;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string format_ms(double ms) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(ms < 10 ? 3 : 1) << ms << " ms";
  return out.str();
}

ProcessorModel bins_only(std::vector<double> bin_probs) {
  std::vector<std::vector<double>> cond(bin_probs.size(), {1.0, 0.0});
  return make_model(std::move(bin_probs), std::move(cond));
}

std::vector<std::string> words(int n) {
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (int i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(i));
  return tokens;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void criterion_u_bound_values() {
  const double u3 = u_bound(0.9, 3);
  const double u5 = u_bound(0.9, 5);
  require(u3 <= 0.126, "u_bound(0.9, 3) exceeds 0.126");
  require(u5 <= 0.108, "u_bound(0.9, 5) exceeds 0.108");
  require(std::abs(u3 - 0.1252) <= 1e-6, "u_bound(0.9, 3) != 0.1252");
  require(std::abs(u5 - 0.107704) <= 1e-6, "u_bound(0.9, 5) != 0.107704");
}

void criterion_accuracy_floor() {
  auto [u1, envelope] = factor_two_bound(0.88);
  require(std::abs((1.0 - u1) - 0.7744) <= 1e-12, "accuracy floor at q=0.88 is not 77.44%");
  require(1.0 - u1 >= 0.77, "accuracy floor dips under 77%");
  require(envelope >= u1, "two-sided envelope dips under the exact value");
}

void criterion_empty_mass_bounds() {
  for (std::int64_t num_bins : {10, 100, 1000, 4096}) {
    double exponential = empty_bin_mass_bounds(num_bins, 3 * num_bins).second;
    require(exponential == std::exp(-3.0), "exponential bound at m = 3|B| is not e^-3");
    require(exponential < 0.05, "e^-3 bound not under 0.05");
  }
  SplitMix64 rng(1001);
  for (int round = 0; round < 1000; ++round) {
    int num_bins = 2 + static_cast<int>(rng.next_below(63));
    auto model = bins_only(random_simplex(rng, num_bins));
    std::int64_t m = static_cast<std::int64_t>(rng.next_below(num_bins));
    double w = empty_bin_mass_exact(model, m);
    double finite = empty_bin_mass_bounds(num_bins, m).first;
    require(w <= finite + 1e-12, "exact empty mass exceeds the finite bound at m < |B|");
  }
}

void criterion_oracle_under_bound() {
  SplitMix64 rng(777);
  for (int round = 0; round < 200; ++round) {
    int num_bins = 1 + static_cast<int>(rng.next_below(3));
    int num_values = 2 + static_cast<int>(rng.next_below(2));
    int m = 1 + static_cast<int>(rng.next_below(6));
    auto model = random_model(rng, num_bins, num_values);
    double oracle = brute_force_expected_error(model, m, FallbackPolicy::UniformRandomValue);
    double bound = corpus_error_bound(model, m, conservative_fallback_errors(model));
    require(oracle <= bound + 1e-9, "exhaustive expected error exceeds the corpus bound");
  }
}

void criterion_monte_carlo_matches_oracle() {
  auto model = make_model({1.0}, {{0.7, 0.3}});
  SimulationResult mc = monte_carlo(model, 1, 100000, 0, FallbackPolicy::UniformRandomValue,
                                    -1, 4);
  require(std::abs(mc.mean_error - 0.42) <= 4.0 * mc.std_error,
          "Monte Carlo mean is not within 4 standard errors of 0.42");
}

void criterion_bound_ordering() {
  SplitMix64 rng(2026);
  for (int round = 0; round < 10000; ++round) {
    double u = rng.next_unit();
    double q = std::max(u, 1.0 - u);
    std::int64_t n = 1 + 2 * static_cast<std::int64_t>(rng.next_below(61));
    double u_n = u_bound(q, n);
    double u_1 = 1.0 - q * q;
    require(u_n >= (1.0 - q) - 1e-15, "u_bound dips under the error floor");
    require(u_n <= u_1 + 1e-15, "u_bound exceeds the single-instance value");
    require(u_1 <= 2.0 * (1.0 - q) + 1e-15, "single-instance value exceeds twice the floor");
    if (q > 0.5) {
      require(u_bound(q, n + 2) <= u_n + 1e-15, "u_bound is not non-increasing in odd n");
    }
  }
}

void criterion_extraction_counts() {
  require(extract_window_instances(words(100), 10).corpus.size() == 819,
          "100 tokens with width 10 do not yield 819 instances");
  for (int n : {1, 10, 1000}) {
    require(extract_bigram_instances(words(n)).corpus.size() == n + 1,
            "bigram extraction does not yield n+1 instances");
  }
}

void criterion_systems_fixture() {
  auto rows = load_systems_file(BINLEARN_DATA_DIR "/systems.json");
  require(rows.size() == 5, "systems fixture does not hold 5 rows");
  std::vector<double> ratios;
  for (const SystemSummary& row : rows) ratios.push_back(row.ratio);
  std::sort(ratios.begin(), ratios.end(), std::greater<>());
  const std::vector<double> expected{40.0, 10.0, 1.2, 0.035, 0.005};
  require(ratios == expected, "fixture ratios are not 40, 10, 1.2, 0.035, 0.005");
}

void criterion_skewed_bound() {
  SplitMix64 rng(808);
  for (int round = 0; round < 500; ++round) {
    int high_bins = 1 + static_cast<int>(rng.next_below(20));
    int low_bins = static_cast<int>(rng.next_below(30));
    int num_bins = high_bins + low_bins;
    double c = low_bins == 0 ? 0.0 : 0.9 * rng.next_unit();
    std::vector<double> probs;
    if (low_bins > 0) {
      probs = random_simplex(rng, low_bins);
      for (double& p : probs) p *= c;
    }
    probs.insert(probs.end(), high_bins, (1.0 - c) / high_bins);
    std::int64_t m = static_cast<std::int64_t>(rng.next_below(5 * num_bins + 1));

    SkewParams params = make_skew_params(c, static_cast<double>(high_bins) / num_bins);
    double w = empty_bin_mass_exact(bins_only(probs), m);
    require(w <= skewed_empty_bound(params, num_bins, m) + 1e-12,
            "exact empty mass exceeds the skewed bound");
  }

  SkewParams flat = make_skew_params(0.0, 1.0);
  for (std::int64_t num_bins : {1, 2, 10, 100, 1000}) {
    for (std::int64_t m : {0, 1, 10, 1000}) {
      require(skewed_empty_bound(flat, num_bins, m) ==
                  empty_bin_mass_bounds(num_bins, m).second,
              "skewed bound at c=0, beta=1 is not exactly exponential");
    }
  }
}

void criterion_report_determinism(const std::string& cli) {
  require(!cli.empty(), "CLI binary path was not supplied as argv[1]");

  namespace fs = std::filesystem;
  const fs::path dir =
      fs::temp_directory_path() /
      ("binlearn-accept-" +
       std::to_string(std::chrono::steady_clock::now().time_since_epoch().count()));
  fs::create_directories(dir);

  const std::string model = std::string(BINLEARN_DATA_DIR) + "/example_model.json";
  auto run = [&](int threads, const std::string& tag) {
    fs::path json = dir / (tag + ".json");
    fs::path csv = dir / (tag + ".csv");
    std::string cmd = "\"" + cli + "\" --seed 7 report --model \"" + model +
                      "\" --grid 1,5,20 --trials 200 --threads " + std::to_string(threads) +
                      " --json \"" + json.string() + "\" --csv \"" + csv.string() + "\"";
    int rc = std::system(cmd.c_str());
    require(rc == 0, "report run failed: " + cmd);
    return std::pair{read_file(json), read_file(csv)};
  };

  auto [json_a, csv_a] = run(1, "a");
  auto [json_b, csv_b] = run(1, "b");
  auto [json_c, csv_c] = run(4, "c");
  fs::remove_all(dir);

  require(json_a == json_b, "two single-thread runs differ in JSON output");
  require(csv_a == csv_b, "two single-thread runs differ in CSV output");
  require(json_a == json_c, "four-thread JSON output differs from single-thread");
  require(csv_a == csv_c, "four-thread CSV output differs from single-thread");
  require(!json_a.empty() && !csv_a.empty(), "report outputs are empty");
}

struct Criterion {
  int id;
  std::string label;
  double limit_ms;  // 0 = no limit
  std::function<void()> body;
};

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  const std::vector<Criterion> criteria = {
      {1, "u_bound majority values", 1.0, criterion_u_bound_values},
      {2, "single-instance accuracy floor", 1.0, criterion_accuracy_floor},
      {3, "empty-bin mass bounds", 10000.0, criterion_empty_mass_bounds},
      {4, "exhaustive oracle under the corpus bound", 60000.0, criterion_oracle_under_bound},
      {5, "Monte Carlo matches the oracle", 5000.0, criterion_monte_carlo_matches_oracle},
      {6, "majority bound ordering", 5000.0, criterion_bound_ordering},
      {7, "extraction instance counts", 1000.0, criterion_extraction_counts},
      {8, "systems fixture ratios", 1000.0, criterion_systems_fixture},
      {9, "skewed empty-bin bound", 10000.0, criterion_skewed_bound},
      {10, "report output determinism", 0.0, [&cli] { criterion_report_determinism(cli); }},
  };

  int failures = 0;
  for (const Criterion& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
      criterion.body();
    } catch (const std::exception& e) {
      error = e.what();
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    if (error.empty() && criterion.limit_ms > 0.0 && ms > criterion.limit_ms) {
      std::ostringstream over;
      over << "runtime " << format_ms(ms) << " exceeds the " << format_ms(criterion.limit_ms)
           << " limit";
      error = over.str();
    }
    if (error.empty()) {
      std::cout << "PASS  criterion " << std::setw(2) << criterion.id << "  " << criterion.label
                << " (" << format_ms(ms) << ")\n";
    } else {
      ++failures;
      std::cout << "FAIL  criterion " << std::setw(2) << criterion.id << "  " << criterion.label
                << " (" << format_ms(ms) << "): " << error << "\n";
    }
  }

  if (failures == 0) {
    std::cout << "all " << criteria.size() << " criteria passed\n";
  } else {
    std::cout << failures << " of " << criteria.size() << " criteria failed\n";
  }
  return failures;
}
