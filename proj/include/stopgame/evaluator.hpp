#pragma once

#include <cstdint>
#include <vector>

#include "stopgame/dpi_solver.hpp"
#include "stopgame/game_model.hpp"

namespace stopgame {

// Stationary randomized controls plus hitting-time stopping rules for both
// players. When both regions contain a state, player II's stop takes
// precedence there (simultaneous stops pay psi2).
struct StrategyProfile {
  std::vector<std::vector<double>> phi;  // per state, mixture over U
  std::vector<std::vector<double>> psi;  // per state, mixture over V
  std::vector<std::uint8_t> stop1;       // membership mask
  std::vector<std::uint8_t> stop2;

  static StrategyProfile from_equilibrium(const GameModel& model,
                                          const EquilibriumSolution& sol);
};

// Throws kInvalidArgument if the profile shape or mixtures are off.
void validate_profile(const GameModel& model, const StrategyProfile& profile);

enum class EstimateMethod { kExact, kMonteCarlo };

struct PayoffEstimate {
  EstimateMethod method = EstimateMethod::kExact;
  std::vector<double> values;         // per state; meaningful where has_value
  std::vector<double> stderrs;        // Monte-Carlo only
  std::vector<std::uint8_t> has_value;
  double linear_residual = 0.0;       // exact only: max row residual
  long paths = 0;                     // Monte-Carlo only
};

// Discounted payoff of a fixed profile from every initial state, by direct
// sparse solve of the evaluation equations. Stopping pays on entry; the
// reported residual is re-checked against every equation.
PayoffEstimate exact_value(const GameModel& model,
                           const StrategyProfile& profile);

enum class Player { kP1, kP2 };

struct BestResponse {
  ValueFunction value;
  std::vector<std::vector<double>> strategy;  // free player's mixture
  std::vector<std::uint8_t> stop_region;      // free player's stop set
  long iterations = 0;
};

struct BestResponseOptions {
  double tol = 1e-10;
  long max_iter = 200000;
  double theta = 1.0;
};

// Optimal stationary-control + hitting-time reply of the other player when
// fixed_player's half of `profile` is held fixed. fixed_player == kP1 fixes
// (phi, stop1) and maximizes over player II's replies; kP2 fixes (psi,
// stop2) and minimizes over player I's.
BestResponse best_response(const GameModel& model, Player fixed_player,
                           const StrategyProfile& profile,
                           const BestResponseOptions& opts = {});

struct DeviationRecord {
  Player deviator = Player::kP2;
  int kind = 0;          // 0 random mixture, 1 stop-region toggle
  int toggled_state = -1;
  double worst_gain = 0.0;  // payoff improvement in the deviator's direction
  int worst_state = -1;
};

struct SaddleCheckReport {
  double tol = 0.0;
  // max over deviations/states of the improvement over u*; <= tol passes.
  double max_gain_p2 = 0.0;
  double max_gain_p1 = 0.0;
  // best-response bracketing: sup |BR - u*| per side
  double br_gap_p2 = 0.0;
  double br_gap_p1 = 0.0;
  double consistency_gap = 0.0;  // |exact_value(equilibrium) - u*|_inf
  long deviations_checked = 0;
  std::vector<DeviationRecord> worst;

  bool ok() const {
    return max_gain_p2 <= tol && max_gain_p1 <= tol && br_gap_p2 <= tol &&
           br_gap_p1 <= tol && consistency_gap <= tol;
  }
};

// Certifies the saddle point numerically: exact evaluation of the
// equilibrium profile, num_random random stationary deviations per player
// (keeping the equilibrium stop regions), every single-state toggle of each
// stop region (keeping the equilibrium mixtures), and one-sided best
// responses.
SaddleCheckReport check_saddle_point(const GameModel& model,
                                     const EquilibriumSolution& sol,
                                     int num_random, std::uint64_t seed,
                                     double tol);

}  // namespace stopgame
