#include "stopgame/evaluator.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stopgame/errors.hpp"
#include "stopgame/kernels.hpp"
#include "stopgame/rng.hpp"

namespace stopgame {

namespace {

constexpr double kResidualBound = 1e-10;

// Mixed extension of one state's rates and reward under (phi_i, psi_i).
struct MixedRow {
  std::vector<double> rates;  // dense over destinations, diagonal excluded
  double outflow = 0.0;
  double reward = 0.0;
};

MixedRow mix_row(const GameModel& model, int i,
                 const std::vector<double>& phi_i,
                 const std::vector<double>& psi_i) {
  MixedRow mixed;
  mixed.rates.assign(model.num_states, 0.0);
  for (int a = 0; a < model.num_actions_p1(); ++a) {
    if (phi_i[a] == 0.0) continue;
    for (int b = 0; b < model.num_actions_p2(); ++b) {
      const double weight = phi_i[a] * psi_i[b];
      if (weight == 0.0) continue;
      const SparseRow& row = model.rate_row(i, a, b);
      for (std::size_t k = 0; k < row.cols.size(); ++k) {
        if (row.cols[k] != i) mixed.rates[row.cols[k]] += weight * row.vals[k];
      }
      mixed.reward += weight * model.reward_rate(i, a, b);
    }
  }
  for (int j = 0; j < model.num_states; ++j) {
    if (j != i) mixed.outflow += mixed.rates[j];
  }
  return mixed;
}

void check_mixture(const std::vector<double>& p, std::size_t expected,
                   const char* what, int state) {
  if (p.size() != expected) {
    std::ostringstream os;
    os << what << " mixture at state " << state << " has wrong length";
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
  double total = 0.0;
  for (double v : p) {
    if (v < -1e-12) {
      std::ostringstream os;
      os << what << " mixture at state " << state << " has negative mass";
      throw Error(ErrorCode::kInvalidArgument, os.str());
    }
    total += v;
  }
  if (std::fabs(total - 1.0) > 1e-9) {
    std::ostringstream os;
    os << what << " mixture at state " << state << " sums to " << total;
    throw Error(ErrorCode::kInvalidArgument, os.str());
  }
}

std::vector<double> random_mixture(CounterRng& rng, int n) {
  // Exponential normalization: uniform on the simplex.
  std::vector<double> p(n);
  double total = 0.0;
  for (double& v : p) {
    v = -std::log(rng.next_open_double());
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

StrategyProfile StrategyProfile::from_equilibrium(
    const GameModel& model, const EquilibriumSolution& sol) {
  StrategyProfile profile;
  profile.phi = sol.phi_star;
  profile.psi = sol.psi_star;
  profile.stop1.assign(model.num_states, 0);
  profile.stop2.assign(model.num_states, 0);
  for (int i : sol.region_a1) profile.stop1[i] = 1;
  for (int i : sol.region_a2) profile.stop2[i] = 1;
  return profile;
}

void validate_profile(const GameModel& model, const StrategyProfile& profile) {
  const std::size_t n = static_cast<std::size_t>(model.num_states);
  if (profile.phi.size() != n || profile.psi.size() != n ||
      profile.stop1.size() != n || profile.stop2.size() != n) {
    throw Error(ErrorCode::kInvalidArgument,
                "profile arrays do not match the state count");
  }
  for (int i = 0; i < model.num_states; ++i) {
    check_mixture(profile.phi[i], model.actions_p1.size(), "player I", i);
    check_mixture(profile.psi[i], model.actions_p2.size(), "player II", i);
  }
}

PayoffEstimate exact_value(const GameModel& model,
                           const StrategyProfile& profile) {
  validate_profile(model, profile);
  const int n = model.num_states;

  // Terminal values; stop2 takes precedence on overlap.
  std::vector<double> terminal(n, 0.0);
  std::vector<char> is_terminal(n, 0);
  std::vector<int> continuation;
  std::vector<int> index_in_continuation(n, -1);
  for (int i = 0; i < n; ++i) {
    if (profile.stop2[i]) {
      terminal[i] = model.psi2[i];
      is_terminal[i] = 1;
    } else if (profile.stop1[i]) {
      terminal[i] = model.psi1[i];
      is_terminal[i] = 1;
    } else {
      index_in_continuation[i] = static_cast<int>(continuation.size());
      continuation.push_back(i);
    }
  }

  PayoffEstimate est;
  est.method = EstimateMethod::kExact;
  est.values.assign(n, 0.0);
  est.has_value.assign(n, 1);

  std::vector<MixedRow> mixed(continuation.size());
  for (std::size_t k = 0; k < continuation.size(); ++k) {
    mixed[k] = mix_row(model, continuation[k], profile.phi[continuation[k]],
                       profile.psi[continuation[k]]);
  }

  if (!continuation.empty()) {
    const int m = static_cast<int>(continuation.size());
    Eigen::SparseMatrix<double> A(m, m);
    Eigen::VectorXd rhs(m);
    std::vector<Eigen::Triplet<double>> triplets;
    for (int k = 0; k < m; ++k) {
      const int i = continuation[k];
      const MixedRow& row = mixed[k];
      triplets.emplace_back(k, k, model.alpha + row.outflow);
      double b = row.reward;
      for (int j = 0; j < n; ++j) {
        if (j == i || row.rates[j] == 0.0) continue;
        if (is_terminal[j]) {
          b += row.rates[j] * terminal[j];
        } else {
          triplets.emplace_back(k, index_in_continuation[j], -row.rates[j]);
        }
      }
      rhs[k] = b;
    }
    A.setFromTriplets(triplets.begin(), triplets.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularSystem,
                  "evaluation system factorization failed; internal bug");
    }
    Eigen::VectorXd x = lu.solve(rhs);
    if (lu.info() != Eigen::Success) {
      throw Error(ErrorCode::kSingularSystem,
                  "evaluation system solve failed; internal bug");
    }
    for (int k = 0; k < m; ++k) est.values[continuation[k]] = x[k];

    // Independent residual scan of every equation.
    double residual = 0.0;
    for (int k = 0; k < m; ++k) {
      const int i = continuation[k];
      const MixedRow& row = mixed[k];
      double lhs = (model.alpha + row.outflow) * est.values[i];
      double rhs_full = row.reward;
      for (int j = 0; j < n; ++j) {
        if (j == i || row.rates[j] == 0.0) continue;
        rhs_full += row.rates[j] *
                    (is_terminal[j] ? terminal[j] : est.values[j]);
      }
      residual = std::max(residual, std::fabs(lhs - rhs_full));
    }
    est.linear_residual = residual;
    if (residual > kResidualBound) {
      std::ostringstream os;
      os << "evaluation residual " << residual << " exceeds " << kResidualBound;
      throw Error(ErrorCode::kSingularSystem, os.str());
    }
  }

  for (int i = 0; i < n; ++i) {
    if (is_terminal[i]) est.values[i] = terminal[i];
  }
  return est;
}

BestResponse best_response(const GameModel& model, Player fixed_player,
                           const StrategyProfile& profile,
                           const BestResponseOptions& opts) {
  const int n = model.num_states;
  const UniformizedModel um = uniformize(model, opts.theta);
  const bool p2_free = fixed_player == Player::kP1;

  const auto& fixed_mix = p2_free ? profile.phi : profile.psi;
  const auto& fixed_stop = p2_free ? profile.stop1 : profile.stop2;
  const int free_actions = p2_free ? um.nb : um.na;
  const int fixed_actions = p2_free ? um.na : um.nb;
  if (fixed_mix.size() != static_cast<std::size_t>(n) ||
      fixed_stop.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::kInvalidArgument,
                "fixed profile half does not match the state count");
  }
  for (int i = 0; i < n; ++i) {
    check_mixture(fixed_mix[i], fixed_actions,
                  p2_free ? "player I" : "player II", i);
  }
  const std::vector<double>& terminal_pay = p2_free ? model.psi1 : model.psi2;
  const std::vector<double>& clamp_pay = p2_free ? model.psi2 : model.psi1;

  // Per-(state, free action) stage rewards and kernels mixed over the fixed
  // player's actions.
  std::vector<double> mixed_reward(static_cast<std::size_t>(n) * free_actions,
                                   0.0);
  std::vector<double> mixed_kernel(
      static_cast<std::size_t>(n) * free_actions * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int f = 0; f < free_actions; ++f) {
      const std::size_t slot = static_cast<std::size_t>(i) * free_actions + f;
      double* krow = mixed_kernel.data() + slot * n;
      for (int x = 0; x < fixed_actions; ++x) {
        const double w = fixed_mix[i][x];
        if (w == 0.0) continue;
        const int a = p2_free ? x : f;
        const int b = p2_free ? f : x;
        const std::size_t idx = um.row_index(i, a, b);
        mixed_reward[slot] += w * um.stage_reward[idx];
        const double* src = um.kernel_row(i, a, b);
        for (int j = 0; j < n; ++j) krow[j] += w * src[j];
      }
    }
  }

  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) {
    v[i] = fixed_stop[i] ? terminal_pay[i] : clamp_pay[i];
  }
  std::vector<double> next(n);
  std::vector<int> best_action(n, 0);
  const auto& dot = kernels::active().dot;

  auto sweep = [&](const std::vector<double>& cur, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      if (fixed_stop[i]) {
        out[i] = terminal_pay[i];
        best_action[i] = 0;
        continue;
      }
      double best = p2_free ? -std::numeric_limits<double>::infinity()
                            : std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int f = 0; f < free_actions; ++f) {
        const std::size_t slot =
            static_cast<std::size_t>(i) * free_actions + f;
        const double val =
            mixed_reward[slot] +
            um.stage_discount[i] *
                dot(mixed_kernel.data() + slot * n, cur.data(), cur.size());
        if (p2_free ? val > best : val < best) {
          best = val;
          arg = f;
        }
      }
      best_action[i] = arg;
      out[i] = p2_free ? std::max(best, clamp_pay[i])
                       : std::min(best, clamp_pay[i]);
    }
  };

  long iterations = 0;
  bool converged = false;
  while (iterations < opts.max_iter) {
    sweep(v, next);
    ++iterations;
    const double diff = kernels::max_abs_diff(next, v);
    std::swap(v, next);
    if (diff <= opts.tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw Error(ErrorCode::kMaxIterExceeded,
                "best-response iteration did not converge");
  }

  BestResponse br;
  br.value.values = v;
  br.iterations = iterations;
  br.strategy.assign(n, std::vector<double>(free_actions, 0.0));
  br.stop_region.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    br.strategy[i][best_action[i]] = 1.0;
    if (!fixed_stop[i]) {
      const double eps = contact_epsilon(opts.tol, model.psi1[i], model.psi2[i]);
      if (std::fabs(v[i] - clamp_pay[i]) <= eps) br.stop_region[i] = 1;
    }
  }
  return br;
}

SaddleCheckReport check_saddle_point(const GameModel& model,
                                     const EquilibriumSolution& sol,
                                     int num_random, std::uint64_t seed,
                                     double tol) {
  SaddleCheckReport report;
  report.tol = tol;
  const int n = model.num_states;
  const std::vector<double>& u = sol.u_star.values;
  const StrategyProfile equilibrium =
      StrategyProfile::from_equilibrium(model, sol);

  {
    PayoffEstimate consistency = exact_value(model, equilibrium);
    report.consistency_gap = kernels::max_abs_diff(consistency.values, u);
  }

  auto record = [&report](DeviationRecord rec) {
    if (rec.deviator == Player::kP2) {
      report.max_gain_p2 = std::max(report.max_gain_p2, rec.worst_gain);
    } else {
      report.max_gain_p1 = std::max(report.max_gain_p1, rec.worst_gain);
    }
    ++report.deviations_checked;
    if (rec.worst_gain > report.tol) report.worst.push_back(rec);
  };

  auto gain_of = [&](const StrategyProfile& profile, Player deviator,
                     int kind, int toggled) {
    PayoffEstimate est = exact_value(model, profile);
    DeviationRecord rec;
    rec.deviator = deviator;
    rec.kind = kind;
    rec.toggled_state = toggled;
    for (int i = 0; i < n; ++i) {
      const double gain = deviator == Player::kP2 ? est.values[i] - u[i]
                                                  : u[i] - est.values[i];
      if (gain > rec.worst_gain) {
        rec.worst_gain = gain;
        rec.worst_state = i;
      }
    }
    record(rec);
  };

  CounterRng rng(seed, 0);
  for (int d = 0; d < num_random; ++d) {
    StrategyProfile dev = equilibrium;
    for (int i = 0; i < n; ++i) {
      dev.psi[i] = random_mixture(rng, model.num_actions_p2());
    }
    gain_of(dev, Player::kP2, 0, -1);
  }
  for (int d = 0; d < num_random; ++d) {
    StrategyProfile dev = equilibrium;
    for (int i = 0; i < n; ++i) {
      dev.phi[i] = random_mixture(rng, model.num_actions_p1());
    }
    gain_of(dev, Player::kP1, 0, -1);
  }
  for (int s = 0; s < n; ++s) {
    StrategyProfile dev = equilibrium;
    dev.stop2[s] = dev.stop2[s] ? 0 : 1;
    gain_of(dev, Player::kP2, 1, s);
  }
  for (int s = 0; s < n; ++s) {
    StrategyProfile dev = equilibrium;
    dev.stop1[s] = dev.stop1[s] ? 0 : 1;
    gain_of(dev, Player::kP1, 1, s);
  }

  {
    BestResponse br2 = best_response(model, Player::kP1, equilibrium);
    BestResponse br1 = best_response(model, Player::kP2, equilibrium);
    report.br_gap_p2 = kernels::max_abs_diff(br2.value.values, u);
    report.br_gap_p1 = kernels::max_abs_diff(br1.value.values, u);
  }
  return report;
}

}  // namespace stopgame
