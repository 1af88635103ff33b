#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "stopgame/dpi_solver.hpp"
#include "stopgame/errors.hpp"
#include "stopgame/models.hpp"

using namespace stopgame;

namespace {

bool rows_equal(const SparseRow& a, const SparseRow& b) {
  return a.cols == b.cols && a.vals == b.vals;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("queue rates follow the birth-death template") {
  QueueSpec spec;
  spec.actions_p1 = {"h0", "h1"};
  spec.actions_p2 = {"g0"};
  spec.h = {0.0, 1.0};
  spec.g = {0.0};
  spec.lambda = [](int) { return 1.0; };
  spec.mu = [](int) { return 2.0; };
  spec.c = 0.0;
  spec.c1 = [](int, int) { return 0.0; };
  spec.c2 = [](int, int) { return 0.0; };
  spec.s_max = 8;
  GameModel m = build_queueing_model(spec);

  SUBCASE("state 0 has no service transition") {
    for (int a = 0; a < 2; ++a) {
      const SparseRow& row = m.rate_row(0, a, 0);
      CHECK(row.value_at(1) == 1.0);
      CHECK(row.value_at(0) == -1.0);
      CHECK(row.cols.size() == 2);  // up + diagonal only
    }
  }

  SUBCASE("service boost shows up in the downward rate") {
    CHECK(m.rate_row(5, 0, 0).value_at(4) == 2.0);
    CHECK(m.rate_row(5, 1, 0).value_at(4) == 3.0);
  }

  SUBCASE("interior rows are conservative") {
    for (int i = 0; i < m.num_states; ++i) {
      for (int a = 0; a < 2; ++a) {
        double sum = 0.0;
        for (double v : m.rate_row(i, a, 0).vals) sum += v;
        CHECK(sum == 0.0);
      }
    }
  }

  SUBCASE("reward is c + r_lin * i") {
    CHECK(m.reward_rate(3, 0, 0) == 3.0);
    CHECK(m.psi1[4] == doctest::Approx(8.0 + 0.4));
    CHECK(m.psi2[4] == 0.5);
  }
}

TEST_CASE("default queue spec builds a valid model") {
  GameModel m = build_queueing_model(default_queue_spec());
  CHECK(m.num_states == 51);
  ValidationReport report = validate_model(m, queue_certificate(m));
  CHECK(report.ok());
  for (double r : m.reward) CHECK(r >= 0.0);
}

TEST_CASE("queue rejections: negative reward and psi separation") {
  QueueSpec negative = default_queue_spec();
  negative.c2 = [](int, int) { return 1.0; };  // swamps c + r_lin*i at i=0
  CHECK_THROWS_AS(build_queueing_model(negative), Error);
  try {
    build_queueing_model(negative);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRejected);
  }

  QueueSpec inseparable = default_queue_spec();
  inseparable.c_prime = 8.0;  // equals c_bar + R(0)
  CHECK_THROWS_AS(build_queueing_model(inseparable), Error);
}

TEST_CASE("model JSON round trip is field-for-field") {
  GameModel m = build_queueing_model([] {
    QueueSpec spec = default_queue_spec();
    spec.s_max = 6;
    return spec;
  }());
  const auto path = temp_file("stopgame_roundtrip.json");
  save_model(m, path.string());
  GameModel loaded = load_model(path.string());
  std::filesystem::remove(path);

  CHECK(loaded.num_states == m.num_states);
  CHECK(loaded.actions_p1 == m.actions_p1);
  CHECK(loaded.actions_p2 == m.actions_p2);
  CHECK(loaded.alpha == m.alpha);
  CHECK(loaded.psi1 == m.psi1);
  CHECK(loaded.psi2 == m.psi2);
  CHECK(loaded.reward == m.reward);
  REQUIRE(loaded.rates.size() == m.rates.size());
  for (std::size_t r = 0; r < m.rates.size(); ++r) {
    CHECK(rows_equal(loaded.rates[r], m.rates[r]));
  }
}

TEST_CASE("round trip preserves random models bit for bit") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    GameModel m = random_model(RandomModelOptions{}, seed);
    GameModel back = model_from_json_text(model_to_json_text(m));
    CHECK(back.alpha == m.alpha);
    CHECK(back.psi1 == m.psi1);
    CHECK(back.psi2 == m.psi2);
    CHECK(back.reward == m.reward);
    for (std::size_t r = 0; r < m.rates.size(); ++r) {
      CHECK(rows_equal(back.rates[r], m.rates[r]));
    }
  }
}

TEST_CASE("missing fields are named in load errors") {
  const char* text = R"({
    "alpha": 1.0, "states": 1,
    "actions_p1": ["a"], "actions_p2": ["b"],
    "rates": [], "rewards": [], "psi1": [1.0]
  })";
  try {
    model_from_json_text(text);
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("psi2") != std::string::npos);
  }
}

TEST_CASE("diagonals are reconstructed from conservativeness when omitted") {
  const char* text = R"({
    "alpha": 1.0, "states": 2,
    "actions_p1": ["a"], "actions_p2": ["b"],
    "rates": [[0, 0, 0, 1, 2.0]],
    "rewards": [[0, 0, 0, 1.5]],
    "psi1": [3.0, 3.0], "psi2": [0.0, 0.0]
  })";
  GameModel m = model_from_json_text(text);
  CHECK(m.rate_row(0, 0, 0).value_at(0) == -2.0);
  CHECK(m.rate_row(1, 0, 0).value_at(1) == 0.0);
}

TEST_CASE("negative off-diagonal rate entries are rejected on load") {
  const char* text = R"({
    "alpha": 1.0, "states": 2,
    "actions_p1": ["a"], "actions_p2": ["b"],
    "rates": [[0, 0, 0, 1, -2.0]],
    "rewards": [],
    "psi1": [3.0, 3.0], "psi2": [0.0, 0.0]
  })";
  try {
    model_from_json_text(text);
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRejected);
  }
}

TEST_CASE("random models validate across seeds") {
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    GameModel m = random_model(RandomModelOptions{}, seed);
    CHECK(validate_model(m).ok());
    CHECK(m.num_states >= 2);
    CHECK(m.num_states <= 8);
    CHECK(m.alpha >= 0.2);
    CHECK(m.alpha <= 2.0);
  }
}

TEST_CASE("solved default queue value is non-decreasing in the queue length") {
  QueueSpec spec = default_queue_spec();
  spec.s_max = 30;  // smaller truncation keeps the test quick
  GameModel m = build_queueing_model(spec);
  LyapunovCertificate cert = queue_certificate(m);
  REQUIRE(validate_model(m, cert).ok());
  SolveOptions opts;
  opts.tol = 1e-9;
  EquilibriumSolution sol = value_iterate(uniformize(m, 1.0), cert.W, opts);
  for (int i = 0; i + 1 < m.num_states; ++i) {
    CHECK(sol.u_star.values[i + 1] >= sol.u_star.values[i] - 1e-6);
  }
}
