#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stopgame/dpi_solver.hpp"
#include "stopgame/evaluator.hpp"
#include "stopgame/models.hpp"
#include "stopgame/simulator.hpp"

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

StrategyProfile trivial_profile(const GameModel& m) {
  StrategyProfile p;
  p.phi.assign(m.num_states, std::vector<double>(m.actions_p1.size(), 0.0));
  p.psi.assign(m.num_states, std::vector<double>(m.actions_p2.size(), 0.0));
  for (int i = 0; i < m.num_states; ++i) {
    p.phi[i][0] = 1.0;
    p.psi[i][0] = 1.0;
  }
  p.stop1.assign(m.num_states, 0);
  p.stop2.assign(m.num_states, 0);
  return p;
}

}  // namespace

TEST_CASE("immediate stop pays the obstacle with zero spread") {
  GameModel m = absorbing_model(1.0, 1.0, 4.0, 9.0);
  StrategyProfile p = trivial_profile(m);
  p.stop2[0] = 1;
  SimulationConfig cfg;
  cfg.num_paths = 100;
  cfg.master_seed = 5;
  auto paths = simulate_paths(m, p, cfg, 0);
  REQUIRE(paths.size() == 100);
  for (const PathRecord& path : paths) {
    CHECK(path.states.size() == 1);
    CHECK(path.stop_reason == StopReason::kP2Stop);
    CHECK(path.end_time == 0.0);
  }
  PayoffEstimate est = estimate_payoff(paths, m, p);
  CHECK(est.values[0] == 4.0);
  CHECK(est.stderrs[0] == 0.0);
  CHECK(est.paths == 100);
}

TEST_CASE("pure-death hitting time matches the exponential oracle") {
  // One transient state decaying at rate 1 into an absorbing stop state:
  // the stop time is Exp(1), mean 1.
  GameModel m;
  m.num_states = 2;
  m.actions_p1 = {"a0"};
  m.actions_p2 = {"b0"};
  m.alpha = 1.0;
  m.rates = {SparseRow{{0}, {0.0}}, SparseRow{{0, 1}, {1.0, -1.0}}};
  m.reward = {0.0, 0.0};
  m.psi1 = {5.0, 5.0};
  m.psi2 = {1.0, 1.0};
  StrategyProfile p = trivial_profile(m);
  p.stop2[0] = 1;

  SimulationConfig cfg;
  cfg.num_paths = 20000;
  cfg.master_seed = 99;
  auto paths = simulate_paths(m, p, cfg, 1);
  double mean = 0.0;
  for (const PathRecord& path : paths) {
    CHECK(path.stop_reason == StopReason::kP2Stop);
    mean += path.end_time;
  }
  mean /= static_cast<double>(paths.size());
  double var = 0.0;
  for (const PathRecord& path : paths) {
    var += (path.end_time - mean) * (path.end_time - mean);
  }
  const double se =
      std::sqrt(var / (paths.size() - 1.0) / static_cast<double>(paths.size()));
  CHECK(std::fabs(mean - 1.0) <= 3.5 * se);
}

TEST_CASE("zero-rate continuation runs to the horizon deterministically") {
  const double rho = 1.0;
  const double alpha = 0.5;
  GameModel m = absorbing_model(rho, alpha, 0.0, 10.0);
  StrategyProfile p = trivial_profile(m);
  SimulationConfig cfg;
  cfg.num_paths = 50;
  cfg.master_seed = 1;
  cfg.horizon_cap = 8.0;
  auto paths = simulate_paths(m, p, cfg, 0);
  const double expected = rho * (1.0 - std::exp(-alpha * 8.0)) / alpha;
  for (const PathRecord& path : paths) {
    CHECK(path.stop_reason == StopReason::kHorizon);
    CHECK(path_payoff(path, m) == doctest::Approx(expected).epsilon(1e-14));
  }
  PayoffEstimate est = estimate_payoff(paths, m, p);
  CHECK(est.values[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(est.stderrs[0] <= 1e-12);  // identical payoffs up to mean roundoff
}

TEST_CASE("default horizon keeps the truncation bias under the budget") {
  GameModel m = random_model(RandomModelOptions{}, 4);
  const double bias = 1e-6;
  const double horizon = default_horizon(m, bias);
  double r_max = 0.0;
  for (double r : m.reward) r_max = std::max(r_max, r);
  double psi1_max = 0.0;
  for (double v : m.psi1) psi1_max = std::max(psi1_max, v);
  CHECK(std::exp(-m.alpha * horizon) * (r_max / m.alpha + psi1_max) <=
        bias * (1.0 + 1e-12));
}

TEST_CASE("identical seeds reproduce paths; prefixes are schedule independent") {
  GameModel m = random_model(RandomModelOptions{}, 11);
  EquilibriumSolution sol = [&m] {
    ValidationReport report = validate_model(m);
    REQUIRE(report.ok());
    SolveOptions opts;
    opts.tol = 1e-9;
    return value_iterate(uniformize(m, 1.0), report.certificate->W, opts);
  }();
  StrategyProfile p = StrategyProfile::from_equilibrium(m, sol);

  SimulationConfig cfg;
  cfg.num_paths = 400;
  cfg.master_seed = 2024;
  auto first = simulate_paths(m, p, cfg, 0);
  auto second = simulate_paths(m, p, cfg, 0);
  REQUIRE(first.size() == second.size());
  for (std::size_t i = 0; i < first.size(); ++i) {
    CHECK(first[i].states == second[i].states);
    CHECK(first[i].entry_times == second[i].entry_times);
    CHECK(first[i].actions_p1 == second[i].actions_p1);
    CHECK(first[i].actions_p2 == second[i].actions_p2);
  }

  // A shorter run is a bitwise prefix: stream keying is per path index.
  SimulationConfig half = cfg;
  half.num_paths = 200;
  auto prefix = simulate_paths(m, p, half, 0);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    CHECK(prefix[i].states == first[i].states);
    CHECK(prefix[i].entry_times == first[i].entry_times);
  }
}

TEST_CASE("Monte-Carlo estimate agrees with the exact evaluator") {
  GameModel m = random_model(
      [] {
        RandomModelOptions opts;
        opts.max_states = 3;
        opts.rate_max = 2.0;
        opts.alpha_min = 0.5;
        return opts;
      }(),
      21);
  EquilibriumSolution sol = [&m] {
    ValidationReport report = validate_model(m);
    REQUIRE(report.ok());
    SolveOptions opts;
    opts.tol = 1e-10;
    return value_iterate(uniformize(m, 1.0), report.certificate->W, opts);
  }();
  StrategyProfile p = StrategyProfile::from_equilibrium(m, sol);
  PayoffEstimate exact = exact_value(m, p);

  SimulationConfig cfg;
  cfg.num_paths = 30000;
  cfg.master_seed = 77;
  auto paths = simulate_paths(m, p, cfg, 0);
  PayoffEstimate mc = estimate_payoff(paths, m, p);
  const double band = 3.5 * std::max(mc.stderrs[0], 1e-9) + 2e-6;
  CHECK(std::fabs(mc.values[0] - exact.values[0]) <= band);
}

TEST_CASE("path CSV dump carries one row per visited state") {
  GameModel m = absorbing_model(1.0, 1.0, 0.0, 5.0);
  StrategyProfile p = trivial_profile(m);
  SimulationConfig cfg;
  cfg.num_paths = 2;
  cfg.master_seed = 3;
  cfg.horizon_cap = 1.0;
  auto paths = simulate_paths(m, p, cfg, 0);
  std::ostringstream os;
  write_paths_csv(os, paths);
  const std::string text = os.str();
  CHECK(text.find("path_id,jump_time,state,action_p1,action_p2,stop_reason") !=
        std::string::npos);
  CHECK(text.find("HORIZON") != std::string::npos);
}
