#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <sstream>

#include "binlearn/model.hpp"
#include "test_util.hpp"

using namespace binlearn;
using testutil::make_model;
using testutil::random_model;

namespace {

// minimum expected error over every total map, by mixed-radix enumeration
double enumerate_min_error(const ProcessorModel& model) {
  const int num_bins = model.domain.num_bins();
  const int num_values = model.domain.num_values();
  DecisionMap decision;
  decision.assignment.assign(num_bins, 0);
  double best = 1.0;
  while (true) {
    best = std::min(best, expected_error_rate(model, decision));
    int pos = 0;
    while (pos < num_bins && ++decision.assignment[pos] == num_values) {
      decision.assignment[pos] = 0;
      ++pos;
    }
    if (pos == num_bins) return best;
  }
}

}  // namespace

TEST_CASE("slots counts one decision per bin per non-default value") {
  CHECK(slots(2209, 47) == 101614);
  CHECK(slots(1, 1) == 0);
  CHECK(slots(1043 * 1043, 2) == 1087849);
  CHECK_THROWS_AS(slots(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(slots(3, 0), std::invalid_argument);
}

TEST_CASE("validate_model accepts a well-formed model") {
  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.9, 0.1}});
  CHECK(validate_model(model).empty());
  CHECK(is_valid(model));
}

TEST_CASE("validate_model reports a bad bin-probability sum") {
  auto model = make_model({0.6, 0.6}, {{0.9, 0.1}, {0.9, 0.1}});
  auto violations = validate_model(model);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].where == "bin_probs");
  CHECK(violations[0].what == "sum 1.2");
  CHECK(violations[0].residual == doctest::Approx(0.2));
}

TEST_CASE("validate_model names the bin holding a negative conditional") {
  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {1.2, -0.2}});
  auto violations = validate_model(model);
  REQUIRE(!violations.empty());
  bool named = false;
  for (const auto& v : violations) {
    if (v.where.find("b1") != std::string::npos) named = true;
  }
  CHECK(named);
}

TEST_CASE("validate_model flags structural mismatches") {
  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.9, 0.1}});
  model.cond.pop_back();
  CHECK(!validate_model(model).empty());
}

TEST_CASE("expected_error_rate evaluates a decision map") {
  auto perfect = make_model({1.0}, {{1.0, 0.0}});
  CHECK(expected_error_rate(perfect, DecisionMap{{0}}) == 0.0);

  auto two = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.9, 0.1}});
  CHECK(expected_error_rate(two, DecisionMap{{0, 0}}) == doctest::Approx(0.1).epsilon(1e-12));

  auto one = make_model({1.0}, {{0.7, 0.3}});
  CHECK(expected_error_rate(one, DecisionMap{{1}}) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("expected_error_rate rejects bad decision maps") {
  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.9, 0.1}});
  CHECK_THROWS_WITH_AS(expected_error_rate(model, DecisionMap{{0}}), "incomplete decision map",
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(expected_error_rate(model, DecisionMap{{0, -1}}),
                       "incomplete decision map", std::invalid_argument);
  CHECK_THROWS_AS(expected_error_rate(model, DecisionMap{{0, 7}}), std::invalid_argument);
}

TEST_CASE("optimal_error_rate is one minus the top value, bin-averaged") {
  CHECK(optimal_error_rate(make_model({1.0}, {{0.7, 0.3}})) ==
        doctest::Approx(0.3).epsilon(1e-12));

  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.6, 0.4}});
  CHECK(optimal_error_rate(model) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(enumerate_min_error(model) == doctest::Approx(0.25).epsilon(1e-12));

  auto deterministic = make_model({0.3, 0.7}, {{1.0, 0.0}, {0.0, 1.0}});
  CHECK(optimal_error_rate(deterministic) == 0.0);
}

TEST_CASE("optimal_decision picks argmax values") {
  auto model = make_model({0.5, 0.5}, {{0.9, 0.1}, {0.2, 0.8}});
  DecisionMap best = optimal_decision(model);
  REQUIRE(best.assignment.size() == 2);
  CHECK(best.assignment[0] == 0);
  CHECK(best.assignment[1] == 1);
  CHECK(expected_error_rate(model, best) == doctest::Approx(optimal_error_rate(model)));
}

TEST_CASE("no decision map beats the optimal rate") {
  SplitMix64 rng(2024);
  for (int round = 0; round < 200; ++round) {
    int num_bins = 1 + static_cast<int>(rng.next_below(4));
    int num_values = 2 + static_cast<int>(rng.next_below(3));
    auto model = random_model(rng, num_bins, num_values);
    DecisionMap decision;
    for (int b = 0; b < num_bins; ++b) {
      decision.assignment.push_back(static_cast<int>(rng.next_below(num_values)));
    }
    CHECK(expected_error_rate(model, decision) >= optimal_error_rate(model) - 1e-12);
  }
}

TEST_CASE("optimal rate equals the enumerated minimum on small models") {
  SplitMix64 rng(7);
  for (int round = 0; round < 60; ++round) {
    int num_bins = 1 + static_cast<int>(rng.next_below(3));
    int num_values = 2 + static_cast<int>(rng.next_below(2));
    auto model = random_model(rng, num_bins, num_values);
    CHECK(optimal_error_rate(model) ==
          doctest::Approx(enumerate_min_error(model)).epsilon(1e-12));
  }
}

TEST_CASE("error rates ignore bin permutation") {
  SplitMix64 rng(99);
  auto model = random_model(rng, 5, 3);
  DecisionMap decision{{2, 0, 1, 1, 0}};

  std::vector<int> perm{3, 0, 4, 2, 1};
  ProcessorModel shuffled;
  DecisionMap shuffled_decision;
  for (int b : perm) {
    shuffled.domain.add_bin(model.domain.bin_id(b));
    shuffled.bin_probs.push_back(model.bin_probs[b]);
    shuffled.cond.push_back(model.cond[b]);
    shuffled_decision.assignment.push_back(decision.assignment[b]);
  }
  for (const auto& v : model.domain.values()) shuffled.domain.add_value(v);

  CHECK(expected_error_rate(shuffled, shuffled_decision) ==
        doctest::Approx(expected_error_rate(model, decision)).epsilon(1e-12));
  CHECK(optimal_error_rate(shuffled) == doctest::Approx(optimal_error_rate(model)).epsilon(1e-12));
}

TEST_CASE("zero-probability bins contribute nothing") {
  auto model = make_model({1.0, 0.0}, {{0.8, 0.2}, {0.1, 0.9}});
  CHECK(validate_model(model).empty());
  CHECK(optimal_error_rate(model) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(expected_error_rate(model, DecisionMap{{0, 0}}) ==
        doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("model JSON round-trips exactly") {
  SplitMix64 rng(123);
  auto model = random_model(rng, 4, 3);
  std::ostringstream buffer;
  save_model_json(model, buffer);
  std::istringstream in(buffer.str());
  ProcessorModel back = load_model_json(in);
  REQUIRE(back.domain.num_bins() == model.domain.num_bins());
  REQUIRE(back.domain.num_values() == model.domain.num_values());
  for (int b = 0; b < model.domain.num_bins(); ++b) {
    CHECK(back.domain.bin_id(b) == model.domain.bin_id(b));
    CHECK(back.bin_probs[b] == model.bin_probs[b]);
    for (int v = 0; v < model.domain.num_values(); ++v) {
      CHECK(back.cond[b][v] == model.cond[b][v]);
    }
  }
}

TEST_CASE("model loader rejects malformed documents") {
  std::istringstream not_json("{nope");
  CHECK_THROWS_AS(load_model_json(not_json), std::runtime_error);

  std::istringstream missing("{\"bins\": []}");
  CHECK_THROWS_AS(load_model_json(missing), std::runtime_error);

  std::istringstream dup_value(R"({"values": ["x", "x"], "bins": []})");
  CHECK_THROWS_AS(load_model_json(dup_value), std::runtime_error);

  std::istringstream unknown_value(
      R"({"values": ["a"], "bins": [{"id": "b", "p": 1.0, "cond": {"zz": 1.0}}]})");
  CHECK_THROWS_AS(load_model_json(unknown_value), std::runtime_error);
}

TEST_CASE("missing cond entries load as zero probability") {
  std::istringstream in(
      R"({"values": ["a", "c"], "bins": [{"id": "b", "p": 1.0, "cond": {"a": 1.0}}]})");
  ProcessorModel model = load_model_json(in);
  CHECK(model.cond[0][0] == 1.0);
  CHECK(model.cond[0][1] == 0.0);
  CHECK(validate_model(model).empty());
}

TEST_CASE("renormalize rescales explicitly") {
  auto model = make_model({0.6, 0.6}, {{2.0, 2.0}, {0.9, 0.1}});
  CHECK(!validate_model(model).empty());
  renormalize(model);
  CHECK(validate_model(model).empty());
  CHECK(model.bin_probs[0] == doctest::Approx(0.5));
  CHECK(model.cond[0][0] == doctest::Approx(0.5));
}

TEST_CASE("load_model_file reports unreadable paths") {
  CHECK_THROWS_AS(load_model_file("/nonexistent/model.json"), std::invalid_argument);
}
