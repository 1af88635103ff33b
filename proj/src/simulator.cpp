#include "stopgame/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "stopgame/errors.hpp"
#include "stopgame/parallel.hpp"
#include "stopgame/rng.hpp"

namespace stopgame {

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kP1Stop:
      return "P1_STOP";
    case StopReason::kP2Stop:
      return "P2_STOP";
    case StopReason::kHorizon:
      return "HORIZON";
  }
  return "UNKNOWN";
}

double default_horizon(const GameModel& model, double bias_bound) {
  if (!(bias_bound > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "bias bound must be > 0");
  }
  double r_max = 0.0;
  for (double r : model.reward) r_max = std::max(r_max, r);
  double psi1_max = 0.0;
  for (double p : model.psi1) psi1_max = std::max(psi1_max, p);
  const double tail_scale = r_max / model.alpha + psi1_max;
  if (tail_scale <= bias_bound) return 1.0;  // nothing to cut off
  return std::log(tail_scale / bias_bound) / model.alpha;
}

namespace {

// Jump mechanism of the controlled chain under the profile's mixtures: the
// sojourn clock and destination law come from the mixed-extension generator
// q~(j|i) = sum_{a,b} phi_a psi_b q(j|i,a,b), which is the process the
// evaluation criterion is defined on. Holding at the sampled pair's own
// rates instead would bias the sojourn law whenever mixed actions carry
// different total rates.
struct JumpTable {
  std::vector<int> dest;
  std::vector<double> weights;
  double total_rate = 0.0;
};

std::vector<JumpTable> build_jump_tables(const GameModel& model,
                                         const StrategyProfile& profile) {
  std::vector<JumpTable> tables(model.num_states);
  std::vector<double> dense(model.num_states);
  for (int i = 0; i < model.num_states; ++i) {
    std::fill(dense.begin(), dense.end(), 0.0);
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      if (profile.phi[i][a] == 0.0) continue;
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const double w = profile.phi[i][a] * profile.psi[i][b];
        if (w == 0.0) continue;
        const SparseRow& row = model.rate_row(i, a, b);
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          if (row.cols[k] != i && row.vals[k] > 0.0) {
            dense[row.cols[k]] += w * row.vals[k];
          }
        }
      }
    }
    JumpTable& table = tables[i];
    for (int j = 0; j < model.num_states; ++j) {
      if (dense[j] > 0.0) {
        table.dest.push_back(j);
        table.weights.push_back(dense[j]);
        table.total_rate += dense[j];
      }
    }
  }
  return tables;
}

PathRecord sample_path(const std::vector<JumpTable>& tables,
                       const StrategyProfile& profile, double horizon,
                       std::uint64_t master_seed, std::uint64_t path_index,
                       int initial) {
  CounterRng rng(master_seed, path_index);
  PathRecord path;
  int state = initial;
  double t = 0.0;

  for (;;) {
    if (profile.stop2[state]) {
      path.entry_times.push_back(t);
      path.states.push_back(state);
      path.actions_p1.push_back(-1);
      path.actions_p2.push_back(-1);
      path.stop_reason = StopReason::kP2Stop;
      path.end_time = t;
      return path;
    }
    if (profile.stop1[state]) {
      path.entry_times.push_back(t);
      path.states.push_back(state);
      path.actions_p1.push_back(-1);
      path.actions_p2.push_back(-1);
      path.stop_reason = StopReason::kP1Stop;
      path.end_time = t;
      return path;
    }

    // One action pair per sojourn; it feeds the reward integrand and is
    // independent of the clock and jump draws, so the payoff mean matches
    // the mixed-extension law.
    const int a = rng.next_categorical(profile.phi[state]);
    const int b = rng.next_categorical(profile.psi[state]);
    path.entry_times.push_back(t);
    path.states.push_back(state);
    path.actions_p1.push_back(a);
    path.actions_p2.push_back(b);

    const JumpTable& table = tables[state];
    if (table.total_rate <= 0.0) {
      // Absorbing continuation state: run out the clock.
      path.stop_reason = StopReason::kHorizon;
      path.end_time = horizon;
      return path;
    }
    const double sojourn = rng.next_exponential(table.total_rate);
    if (t + sojourn >= horizon) {
      path.stop_reason = StopReason::kHorizon;
      path.end_time = horizon;
      return path;
    }
    t += sojourn;
    state = table.dest[rng.next_categorical(table.weights)];
  }
}

}  // namespace

std::vector<PathRecord> simulate_paths(const GameModel& model,
                                       const StrategyProfile& profile,
                                       const SimulationConfig& cfg,
                                       int initial) {
  validate_profile(model, profile);
  if (cfg.num_paths < 1) {
    throw Error(ErrorCode::kInvalidArgument, "num_paths must be >= 1");
  }
  if (initial < 0 || initial >= model.num_states) {
    throw Error(ErrorCode::kInvalidArgument, "initial state out of range");
  }
  const double horizon = cfg.horizon_cap > 0.0
                             ? cfg.horizon_cap
                             : default_horizon(model, cfg.bias_bound);
  const std::vector<JumpTable> tables = build_jump_tables(model, profile);

  std::vector<PathRecord> paths(cfg.num_paths);
  parallel_for(0, static_cast<std::size_t>(cfg.num_paths), [&](std::size_t p) {
    paths[p] =
        sample_path(tables, profile, horizon, cfg.master_seed, p, initial);
  });
  return paths;
}

double path_payoff(const PathRecord& path, const GameModel& model) {
  const double alpha = model.alpha;
  double payoff = 0.0;
  const std::size_t len = path.states.size();
  for (std::size_t k = 0; k < len; ++k) {
    if (path.actions_p1[k] < 0) break;  // terminal stop entry
    const double t0 = path.entry_times[k];
    const double t1 =
        k + 1 < len ? path.entry_times[k + 1] : path.end_time;
    const double r =
        model.reward_rate(path.states[k], path.actions_p1[k],
                          path.actions_p2[k]);
    payoff += r * (std::exp(-alpha * t0) - std::exp(-alpha * t1)) / alpha;
  }
  switch (path.stop_reason) {
    case StopReason::kP1Stop:
      payoff += std::exp(-alpha * path.end_time) * model.psi1[path.states.back()];
      break;
    case StopReason::kP2Stop:
      payoff += std::exp(-alpha * path.end_time) * model.psi2[path.states.back()];
      break;
    case StopReason::kHorizon:
      break;  // tail dropped; covered by the bias budget
  }
  return payoff;
}

PayoffEstimate estimate_payoff(const std::vector<PathRecord>& paths,
                               const GameModel& model,
                               const StrategyProfile& profile) {
  validate_profile(model, profile);
  if (paths.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no paths to estimate from");
  }
  const int initial = paths.front().states.front();

  std::vector<double> payoffs(paths.size());
  parallel_for(0, paths.size(), [&](std::size_t p) {
    payoffs[p] = path_payoff(paths[p], model);
  });

  double mean = 0.0;
  for (double v : payoffs) mean += v;
  mean /= static_cast<double>(payoffs.size());
  double ss = 0.0;
  for (double v : payoffs) ss += (v - mean) * (v - mean);
  const double stderr_ =
      payoffs.size() > 1
          ? std::sqrt(ss / (static_cast<double>(payoffs.size()) - 1.0) /
                      static_cast<double>(payoffs.size()))
          : 0.0;

  PayoffEstimate est;
  est.method = EstimateMethod::kMonteCarlo;
  est.values.assign(model.num_states, 0.0);
  est.stderrs.assign(model.num_states, 0.0);
  est.has_value.assign(model.num_states, 0);
  est.values[initial] = mean;
  est.stderrs[initial] = stderr_;
  est.has_value[initial] = 1;
  est.paths = static_cast<long>(paths.size());
  return est;
}

void write_paths_csv(std::ostream& os, const std::vector<PathRecord>& paths) {
  os << "path_id,jump_time,state,action_p1,action_p2,stop_reason\n";
  for (std::size_t p = 0; p < paths.size(); ++p) {
    const PathRecord& path = paths[p];
    for (std::size_t k = 0; k < path.states.size(); ++k) {
      os << p << ',' << path.entry_times[k] << ',' << path.states[k] << ','
         << path.actions_p1[k] << ',' << path.actions_p2[k] << ','
         << (k + 1 == path.states.size() ? stop_reason_name(path.stop_reason)
                                         : "")
         << '\n';
    }
  }
}

}  // namespace stopgame
