#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "stopgame/evaluator.hpp"
#include "stopgame/game_model.hpp"

namespace stopgame {

struct SimulationConfig {
  long num_paths = 10000;
  std::uint64_t master_seed = 0;
  double horizon_cap = 0.0;   // <= 0: derive from bias_bound
  double bias_bound = 1e-6;   // truncation bias budget when deriving
};

// Smallest horizon with e^{-alpha T} * (max r / alpha + max psi1) below the
// bias budget.
double default_horizon(const GameModel& model, double bias_bound);

enum class StopReason { kP1Stop, kP2Stop, kHorizon };

const char* stop_reason_name(StopReason r);

// One sampled trajectory. entry_times[k] is when states[k] was entered
// (entry_times[0] == 0); actions_p1/p2[k] are the pair drawn for that
// sojourn, or -1 on the terminal entry of a stopped path.
struct PathRecord {
  std::vector<double> entry_times;
  std::vector<int> states;
  std::vector<int> actions_p1;
  std::vector<int> actions_p2;
  StopReason stop_reason = StopReason::kHorizon;
  double end_time = 0.0;
};

// Samples cfg.num_paths trajectories from `initial` under the profile.
// Stopping fires on entry, player II's region first. Path p draws from a
// counter-based stream keyed by (master_seed, p), so the result is
// bit-identical however the paths are scheduled.
std::vector<PathRecord> simulate_paths(const GameModel& model,
                                       const StrategyProfile& profile,
                                       const SimulationConfig& cfg,
                                       int initial);

// Discounted-payoff estimate for the paths' common initial state. Reward is
// integrated in closed form per sojourn; stopped paths add the discounted
// obstacle payoff. Mean and standard error reduce in path order.
PayoffEstimate estimate_payoff(const std::vector<PathRecord>& paths,
                               const GameModel& model,
                               const StrategyProfile& profile);

double path_payoff(const PathRecord& path, const GameModel& model);

// CSV dump: path_id, jump_time, state, action_p1, action_p2, stop_reason.
void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths);

}  // namespace stopgame
