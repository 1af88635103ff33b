#include <cmath>
#include <vector>

#include "doctest.h"
#include "stopgame/dpi_solver.hpp"
#include "stopgame/errors.hpp"
#include "stopgame/game_model.hpp"
#include "stopgame/models.hpp"
#include "stopgame/rng.hpp"

using namespace stopgame;

namespace {

GameModel absorbing_model(double reward, double alpha, double psi2,
                          double psi1) {
  GameModel m;
  m.num_states = 1;
  m.actions_p1 = {"a0"};
  m.actions_p2 = {"b0"};
  m.alpha = alpha;
  m.rates = {SparseRow{{0}, {0.0}}};
  m.reward = {reward};
  m.psi1 = {psi1};
  m.psi2 = {psi2};
  return m;
}

GameModel two_state_flip(double rate, double alpha) {
  GameModel m;
  m.num_states = 2;
  m.actions_p1 = {"a0"};
  m.actions_p2 = {"b0"};
  m.alpha = alpha;
  m.rates = {SparseRow{{1, 0}, {rate, -rate}}, SparseRow{{0, 1}, {rate, -rate}}};
  m.reward = {0.0, 0.0};
  m.psi1 = {10.0, 10.0};
  m.psi2 = {0.0, 0.0};
  return m;
}

std::vector<double> weight_of(const GameModel& m) {
  ValidationReport report = validate_model(m);
  REQUIRE(report.ok());
  return report.certificate->W;
}

}  // namespace

TEST_CASE("uniformization arithmetic") {
  SUBCASE("state with outflow 3, alpha 0.5, theta 1") {
    GameModel m;
    m.num_states = 2;
    m.actions_p1 = {"a0"};
    m.actions_p2 = {"b0"};
    m.alpha = 0.5;
    m.rates = {SparseRow{{1, 0}, {3.0, -3.0}}, SparseRow{{1}, {0.0}}};
    m.reward = {0.0, 0.0};
    m.psi1 = {1.0, 1.0};
    m.psi2 = {0.0, 0.0};
    UniformizedModel um = uniformize(m, 1.0);
    CHECK(um.stage_discount[0] == doctest::Approx(8.0 / 9.0).epsilon(1e-15));
  }

  SUBCASE("absorbing state keeps a point-mass kernel") {
    GameModel m = absorbing_model(0.0, 0.75, 0.0, 1.0);
    UniformizedModel um = uniformize(m, 1.0);
    CHECK(um.kernel_row(0, 0, 0)[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(um.stage_discount[0] == doctest::Approx(1.0 / 1.75).epsilon(1e-15));
  }

  SUBCASE("two-state flip at rate 2") {
    GameModel m = two_state_flip(2.0, 1.0);
    UniformizedModel um = uniformize(m, 1.0);
    CHECK(um.kernel_row(0, 0, 0)[1] == doctest::Approx(2.0 / 3.0));
    CHECK(um.kernel_row(0, 0, 0)[0] == doctest::Approx(1.0 / 3.0));
  }

  SUBCASE("kernel rows are distributions on random models") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      GameModel m = random_model(RandomModelOptions{}, seed);
      UniformizedModel um = uniformize(m, 1.0);
      for (int i = 0; i < um.num_states; ++i) {
        CHECK(um.stage_discount[i] > 0.0);
        CHECK(um.stage_discount[i] < 1.0);
        for (int a = 0; a < um.na; ++a) {
          for (int b = 0; b < um.nb; ++b) {
            const double* row = um.kernel_row(i, a, b);
            double sum = 0.0;
            for (int j = 0; j < um.num_states; ++j) {
              CHECK(row[j] >= -1e-15);
              sum += row[j];
            }
            CHECK(std::fabs(sum - 1.0) <= 1e-10);
          }
        }
      }
    }
  }

  SUBCASE("theta must be positive") {
    GameModel m = absorbing_model(0.0, 1.0, 0.0, 1.0);
    CHECK_THROWS_AS(uniformize(m, 0.0), Error);
  }
}

TEST_CASE("stage payoff matrices") {
  SUBCASE("zero continuation reduces to the stage reward") {
    GameModel m = random_model(RandomModelOptions{}, 99);
    UniformizedModel um = uniformize(m, 1.0);
    std::vector<double> zero(m.num_states, 0.0);
    for (int i = 0; i < m.num_states; ++i) {
      MatrixGame g = stage_payoff_matrix(um, i, zero);
      for (int a = 0; a < um.na; ++a) {
        for (int b = 0; b < um.nb; ++b) {
          CHECK(g.at(a, b) ==
                doctest::Approx(um.stage_reward[um.row_index(i, a, b)]));
        }
      }
    }
  }

  SUBCASE("absorbing state with constant reward and value x") {
    const double rho = 2.0;
    const double alpha = 1.0;
    GameModel m = absorbing_model(rho, alpha, 0.0, 100.0);
    UniformizedModel um = uniformize(m, 1.0);
    std::vector<double> phi = {3.5};
    MatrixGame g = stage_payoff_matrix(um, 0, phi);
    CHECK(g.at(0, 0) ==
          doctest::Approx(rho / (alpha + 1.0) + 3.5 / (alpha + 1.0)));
  }
}

TEST_CASE("apply_T clamps between the obstacles") {
  SUBCASE("scalar affine map") {
    GameModel m = absorbing_model(1.0, 0.5, 0.0, 10.0);
    UniformizedModel um = uniformize(m, 1.0);
    SweepResult sweep = apply_T(um, {0.0});
    CHECK(sweep.values[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }

  SUBCASE("upper clamp binds when the stage value exceeds psi1") {
    GameModel m = absorbing_model(1.0, 0.5, 0.0, 0.5);
    UniformizedModel um = uniformize(m, 1.0);
    SweepResult sweep = apply_T(um, {10.0});
    // stage value (1 + 10) / 1.5 > psi1
    CHECK(sweep.stage_values[0] > m.psi1[0]);
    CHECK(sweep.values[0] == 0.5);
  }

  SUBCASE("T(psi2) dominates psi2 on random models") {
    for (std::uint64_t seed = 30; seed < 45; ++seed) {
      GameModel m = random_model(RandomModelOptions{}, seed);
      UniformizedModel um = uniformize(m, 1.0);
      SweepResult sweep = apply_T(um, m.psi2);
      for (int i = 0; i < m.num_states; ++i) {
        CHECK(sweep.values[i] >= m.psi2[i] - 1e-12);
        CHECK(sweep.values[i] <= m.psi1[i] + 1e-12);
      }
    }
  }

  SUBCASE("T is monotone") {
    for (std::uint64_t seed = 50; seed < 65; ++seed) {
      GameModel m = random_model(RandomModelOptions{}, seed);
      UniformizedModel um = uniformize(m, 1.0);
      CounterRng rng(seed, 7);
      std::vector<double> lo(m.num_states), hi(m.num_states);
      for (int i = 0; i < m.num_states; ++i) {
        lo[i] = rng.next_double() * 5.0;
        hi[i] = lo[i] + rng.next_double() * 3.0;
      }
      SweepResult slo = apply_T(um, lo);
      SweepResult shi = apply_T(um, hi);
      for (int i = 0; i < m.num_states; ++i) {
        CHECK(slo.values[i] <= shi.values[i] + 1e-12);
      }
    }
  }
}

TEST_CASE("value iteration on scalar models with closed forms") {
  SolveOptions opts;
  opts.tol = 1e-12;

  SUBCASE("interior fixed point rho/alpha") {
    GameModel m = absorbing_model(1.0, 0.5, 0.0, 10.0);
    EquilibriumSolution sol =
        value_iterate(uniformize(m, 1.0), weight_of(m), opts);
    CHECK(sol.u_star.values[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(sol.classification[0] == StateClass::kContinuation);
    CHECK(sol.region_a1.empty());
    CHECK(sol.region_a2.empty());
  }

  SUBCASE("upper obstacle binds: minimizer stops") {
    GameModel m = absorbing_model(1.0, 0.5, 0.0, 1.5);
    EquilibriumSolution sol =
        value_iterate(uniformize(m, 1.0), weight_of(m), opts);
    CHECK(sol.u_star.values[0] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(sol.classification[0] == StateClass::kStopP1);
    CHECK(sol.region_a1 == std::vector<int>{0});
  }

  SUBCASE("lower obstacle binds: maximizer stops") {
    GameModel m = absorbing_model(1.0, 0.5, 3.0, 10.0);
    EquilibriumSolution sol =
        value_iterate(uniformize(m, 1.0), weight_of(m), opts);
    CHECK(sol.u_star.values[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sol.classification[0] == StateClass::kStopP2);
    CHECK(sol.region_a2 == std::vector<int>{0});
  }
}

TEST_CASE("termination residual honors the tolerance") {
  GameModel m = two_state_flip(2.0, 0.3);
  m.reward = {1.0, 4.0};
  UniformizedModel um = uniformize(m, 1.0);
  SolveOptions opts;
  opts.tol = 1e-10;
  EquilibriumSolution sol = value_iterate(um, weight_of(m), opts);
  CHECK(sol.residual <= 1e-10);
  SweepResult fixed = apply_T(um, sol.u_star.values);
  CHECK(weighted_norm(
            [&] {
              std::vector<double> d(m.num_states);
              for (int i = 0; i < m.num_states; ++i) {
                d[i] = fixed.values[i] - sol.u_star.values[i];
              }
              return d;
            }(),
            *sol.u_star.weight) <= 1e-10);
}

TEST_CASE("uniqueness probe and theta independence on random models") {
  for (std::uint64_t seed = 70; seed < 82; ++seed) {
    GameModel m = random_model(RandomModelOptions{}, seed);
    std::vector<double> W = weight_of(m);
    SolveOptions opts;
    opts.tol = 1e-9;
    opts.max_iter = 500000;
    EquilibriumSolution up = value_iterate(uniformize(m, 1.0), W, opts);

    SolveOptions down = opts;
    down.start = SolveOptions::Start::kUpperObstacle;
    EquilibriumSolution from_top = value_iterate(uniformize(m, 1.0), W, down);
    CHECK(weighted_norm(
              [&] {
                std::vector<double> d(m.num_states);
                for (int i = 0; i < m.num_states; ++i) {
                  d[i] = from_top.u_star.values[i] - up.u_star.values[i];
                }
                return d;
              }(),
              W) <= 10.0 * opts.tol);

    EquilibriumSolution theta2 = value_iterate(uniformize(m, 2.0), W, opts);
    CHECK(weighted_norm(
              [&] {
                std::vector<double> d(m.num_states);
                for (int i = 0; i < m.num_states; ++i) {
                  d[i] = theta2.u_star.values[i] - up.u_star.values[i];
                }
                return d;
              }(),
              W) <= 10.0 * opts.tol);
  }
}

TEST_CASE("iteration budget exhaustion raises MAX_ITER_EXCEEDED") {
  GameModel m = two_state_flip(5.0, 0.05);
  m.reward = {3.0, 1.0};
  m.psi1 = {1000.0, 1000.0};
  UniformizedModel um = uniformize(m, 1.0);
  SolveOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 3;
  try {
    value_iterate(um, weight_of(m), opts);
    FAIL("expected MAX_ITER_EXCEEDED");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kMaxIterExceeded);
  }
}

TEST_CASE("verify_dpi accepts solver output and rejects a constructed violation") {
  SUBCASE("solver output passes") {
    for (std::uint64_t seed = 90; seed < 100; ++seed) {
      GameModel m = random_model(RandomModelOptions{}, seed);
      UniformizedModel um = uniformize(m, 1.0);
      SolveOptions opts;
      opts.tol = 1e-10;
      EquilibriumSolution sol = value_iterate(um, weight_of(m), opts);
      DPIReport report = verify_dpi(um, m, sol, 1e-7);
      CHECK(report.ok());
      CHECK(report.max_form_disagreement <= 1e-9);
    }
  }

  SUBCASE("phi = psi1 with a strict interior stage value is flagged") {
    // Absorbing, zero reward: I(psi1) = psi1/2 < psi1 - 2 tol.
    GameModel m = absorbing_model(0.0, 1.0, 0.0, 10.0);
    UniformizedModel um = uniformize(m, 1.0);
    EquilibriumSolution fake;
    fake.u_star.values = {10.0};
    fake.u_star.weight =
        std::make_shared<const std::vector<double>>(weight_of(m));
    fake.classification = {StateClass::kStopP1};
    fake.region_a1 = {0};
    DPIReport report = verify_dpi(um, m, fake, 1e-7);
    CHECK(!report.ok());
    REQUIRE(report.violations.size() == 1);
    CHECK(report.violations[0] == 0);
  }
}
