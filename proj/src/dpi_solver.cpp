#include "stopgame/dpi_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stopgame/errors.hpp"
#include "stopgame/kernels.hpp"
#include "stopgame/parallel.hpp"

namespace stopgame {

namespace {

constexpr double kMonotoneSlack = 1e-12;

void check_monotone(const std::vector<double>& before,
                    const std::vector<double>& after,
                    SolveOptions::Start start, long iteration) {
  for (std::size_t i = 0; i < before.size(); ++i) {
    const double step = after[i] - before[i];
    const bool bad = start == SolveOptions::Start::kLowerObstacle
                         ? step < -kMonotoneSlack
                         : step > kMonotoneSlack;
    if (bad) {
      std::ostringstream os;
      os << "iterate moved the wrong way at state " << i << " on sweep "
         << iteration << " (step " << step << ")";
      throw Error(ErrorCode::kMonotonicityViolation, os.str());
    }
  }
}

}  // namespace

const char* state_class_name(StateClass c) {
  switch (c) {
    case StateClass::kContinuation:
      return "CONTINUATION";
    case StateClass::kStopP1:
      return "STOP_P1";
    case StateClass::kStopP2:
      return "STOP_P2";
  }
  return "UNKNOWN";
}

StateClass state_class_from_name(const std::string& name) {
  if (name == "CONTINUATION") return StateClass::kContinuation;
  if (name == "STOP_P1") return StateClass::kStopP1;
  if (name == "STOP_P2") return StateClass::kStopP2;
  throw Error(ErrorCode::kParseError, "unknown state class: " + name);
}

UniformizedModel uniformize(const GameModel& model, double theta) {
  if (!(theta > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "uniformization constant theta must be > 0");
  }
  UniformizedModel um;
  um.num_states = model.num_states;
  um.na = model.num_actions_p1();
  um.nb = model.num_actions_p2();
  um.alpha = model.alpha;
  um.theta = theta;
  um.q = model.max_outflow();
  um.psi1 = model.psi1;
  um.psi2 = model.psi2;

  const std::size_t rows =
      static_cast<std::size_t>(um.num_states) * um.na * um.nb;
  um.stage_reward.resize(rows);
  um.stage_discount.resize(um.num_states);
  um.kernel.assign(rows * um.num_states, 0.0);

  for (int i = 0; i < um.num_states; ++i) {
    const double denom = model.alpha + um.q[i] + theta;
    um.stage_discount[i] = (um.q[i] + theta) / denom;
    for (int a = 0; a < um.na; ++a) {
      for (int b = 0; b < um.nb; ++b) {
        const std::size_t idx = um.row_index(i, a, b);
        um.stage_reward[idx] = model.reward_rate(i, a, b) / denom;
        double* row = um.kernel.data() +
                      idx * static_cast<std::size_t>(um.num_states);
        const SparseRow& rates = model.rate_row(i, a, b);
        for (std::size_t k = 0; k < rates.cols.size(); ++k) {
          row[rates.cols[k]] += rates.vals[k] / (um.q[i] + theta);
        }
        row[i] += 1.0;  // Kronecker delta term
      }
    }
  }
  return um;
}

MatrixGame stage_payoff_matrix(const UniformizedModel& um, int i,
                               const std::vector<double>& phi) {
  MatrixGame g;
  g.rows = um.na;
  g.cols = um.nb;
  g.payoff.resize(static_cast<std::size_t>(um.na) * um.nb);
  const auto& dot = kernels::active().dot;
  for (int a = 0; a < um.na; ++a) {
    for (int b = 0; b < um.nb; ++b) {
      const std::size_t idx = um.row_index(i, a, b);
      const double expect =
          dot(um.kernel_row(i, a, b), phi.data(), phi.size());
      g.at(a, b) = um.stage_reward[idx] + um.stage_discount[i] * expect;
    }
  }
  return g;
}

SweepResult apply_T(const UniformizedModel& um,
                    const std::vector<double>& phi) {
  SweepResult out;
  out.values.resize(um.num_states);
  out.stage_values.resize(um.num_states);
  out.games.resize(um.num_states);
  parallel_for(0, static_cast<std::size_t>(um.num_states),
               [&](std::size_t i) {
                 const int s = static_cast<int>(i);
                 GameSolution sol =
                     solve_matrix_game(stage_payoff_matrix(um, s, phi));
                 out.stage_values[i] = sol.value;
                 out.values[i] =
                     std::min(std::max(sol.value, um.psi2[s]), um.psi1[s]);
                 out.games[i] = std::move(sol);
               });
  return out;
}

double contact_epsilon(double tol, double psi1, double psi2) {
  return std::max(10.0 * tol,
                  1e-9 * (1.0 + std::max(std::fabs(psi1), std::fabs(psi2))));
}

EquilibriumSolution value_iterate(const UniformizedModel& um,
                                  const std::vector<double>& weight,
                                  const SolveOptions& opts) {
  if (!(opts.tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tol must be > 0");
  }
  if (weight.size() != static_cast<std::size_t>(um.num_states)) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight length does not match the state count");
  }
  for (double w : weight) {
    if (!(w > 0.0)) {
      throw Error(ErrorCode::kDegenerateWeight,
                  "weighted norm needs a strictly positive weight");
    }
  }

  // Weighted-norm contraction factor of T: max over (i,a,b) of
  // stage_discount(i) * <kernel row, W> / W(i). When < 1, terminating at
  // residual * gamma/(1-gamma) <= tol certifies a true error of at most tol;
  // otherwise only the dual successive-difference/residual test applies.
  double gamma_w = 0.0;
  {
    const auto& dot = kernels::active().dot;
    for (int i = 0; i < um.num_states; ++i) {
      for (int a = 0; a < um.na; ++a) {
        for (int b = 0; b < um.nb; ++b) {
          const double expect =
              dot(um.kernel_row(i, a, b), weight.data(), weight.size());
          gamma_w =
              std::max(gamma_w, um.stage_discount[i] * expect / weight[i]);
        }
      }
    }
  }
  const double error_factor =
      gamma_w < 1.0 - 1e-9 ? gamma_w / (1.0 - gamma_w) : -1.0;

  std::vector<double> u = opts.start == SolveOptions::Start::kLowerObstacle
                              ? um.psi2
                              : um.psi1;
  long iterations = 0;
  double last_diff = std::numeric_limits<double>::infinity();

  while (iterations < opts.max_iter) {
    SweepResult sweep = apply_T(um, u);
    ++iterations;
    check_monotone(u, sweep.values, opts.start, iterations);
    last_diff = kernels::sup_abs_ratio_diff(sweep.values, u, weight);

    if (last_diff <= opts.tol) {
      if (iterations >= opts.max_iter) break;
      SweepResult probe = apply_T(um, sweep.values);
      ++iterations;
      check_monotone(sweep.values, probe.values, opts.start, iterations);
      const double residual =
          kernels::sup_abs_ratio_diff(probe.values, sweep.values, weight);
      const bool certified =
          error_factor < 0.0 || residual * error_factor <= opts.tol;
      if (residual <= opts.tol && certified) {
        EquilibriumSolution sol;
        sol.u_star.values = std::move(sweep.values);
        sol.u_star.weight = std::make_shared<const std::vector<double>>(weight);
        sol.iterations = iterations;
        sol.residual = residual;
        sol.classification.resize(um.num_states);
        sol.phi_star.resize(um.num_states);
        sol.psi_star.resize(um.num_states);
        for (int i = 0; i < um.num_states; ++i) {
          sol.phi_star[i] = std::move(probe.games[i].mu);
          sol.psi_star[i] = std::move(probe.games[i].nu);
          const double ui = sol.u_star.values[i];
          const double eps = contact_epsilon(opts.tol, um.psi1[i], um.psi2[i]);
          const double d1 = std::fabs(ui - um.psi1[i]);
          const double d2 = std::fabs(ui - um.psi2[i]);
          if (d1 <= eps || d2 <= eps) {
            // Obstacle contact wins over the equality residual; if somehow
            // within eps of both, the closer obstacle decides.
            if (d1 <= d2) {
              sol.classification[i] = StateClass::kStopP1;
              sol.region_a1.push_back(i);
            } else {
              sol.classification[i] = StateClass::kStopP2;
              sol.region_a2.push_back(i);
            }
          } else {
            sol.classification[i] = StateClass::kContinuation;
          }
        }
        return sol;
      }
      u = std::move(probe.values);
    } else {
      u = std::move(sweep.values);
    }
  }

  std::ostringstream os;
  os << "no convergence after " << iterations
     << " sweeps; last successive difference " << last_diff;
  throw Error(ErrorCode::kMaxIterExceeded, os.str());
}

DPIReport verify_dpi(const UniformizedModel& um, const GameModel& model,
                     const EquilibriumSolution& sol, double tol) {
  const std::vector<double>& u = sol.u_star.values;
  if (u.size() != static_cast<std::size_t>(um.num_states) ||
      sol.classification.size() != u.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "solution does not match the model dimensions");
  }

  DPIReport report;
  report.states.resize(um.num_states);

  parallel_for(0, static_cast<std::size_t>(um.num_states), [&](std::size_t idx) {
    const int i = static_cast<int>(idx);
    DPIStateCheck& chk = report.states[idx];
    chk.state = i;
    chk.klass = sol.classification[idx];
    chk.u = u[idx];

    chk.i_alpha = solve_matrix_game(stage_payoff_matrix(um, i, u)).value;
    chk.gap = chk.u - chk.i_alpha;

    // Rate-form counterpart: same stage game before uniformization.
    MatrixGame hg;
    hg.rows = um.na;
    hg.cols = um.nb;
    hg.payoff.resize(static_cast<std::size_t>(um.na) * um.nb);
    for (int a = 0; a < um.na; ++a) {
      for (int b = 0; b < um.nb; ++b) {
        const SparseRow& row = model.rate_row(i, a, b);
        double drift = 0.0;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          drift += row.vals[k] * u[row.cols[k]];
        }
        hg.at(a, b) = model.reward_rate(i, a, b) + drift;
      }
    }
    const double h_alpha = solve_matrix_game(hg).value;
    chk.h_gap = um.alpha * chk.u - h_alpha;
    const double h_tol = tol * (um.alpha + um.q[idx] + um.theta);

    chk.form_ii = std::min(std::max(chk.i_alpha, um.psi2[idx]), um.psi1[idx]);
    chk.form_iii = std::max(std::min(chk.i_alpha, um.psi1[idx]), um.psi2[idx]);

    std::ostringstream why;
    bool ok = true;
    switch (chk.klass) {
      case StateClass::kContinuation:
        if (std::fabs(chk.gap) > tol) {
          ok = false;
          why << "continuation equality off by " << chk.gap << "; ";
        }
        if (std::fabs(chk.h_gap) > h_tol) {
          ok = false;
          why << "rate-form equality off by " << chk.h_gap << "; ";
        }
        break;
      case StateClass::kStopP2:
        if (chk.gap < -tol) {
          ok = false;
          why << "lower-obstacle inequality reversed by " << -chk.gap << "; ";
        }
        if (chk.h_gap < -h_tol) {
          ok = false;
          why << "rate-form lower inequality reversed by " << -chk.h_gap
              << "; ";
        }
        break;
      case StateClass::kStopP1:
        if (chk.gap > tol) {
          ok = false;
          why << "upper-obstacle inequality reversed by " << chk.gap << "; ";
        }
        if (chk.h_gap > h_tol) {
          ok = false;
          why << "rate-form upper inequality reversed by " << chk.h_gap
              << "; ";
        }
        break;
    }
    if (chk.u < um.psi2[idx] - tol || chk.u > um.psi1[idx] + tol) {
      ok = false;
      why << "value escapes the obstacle sandwich; ";
    }
    if (std::fabs(chk.form_ii - sol.u_star.values[idx]) > tol ||
        std::fabs(chk.form_iii - sol.u_star.values[idx]) > tol) {
      ok = false;
      why << "clamped fixed-point forms disagree with u*; ";
    }
    chk.ok = ok;
    chk.detail = why.str();
  });

  for (const auto& chk : report.states) {
    report.max_form_disagreement =
        std::max(report.max_form_disagreement,
                 std::fabs(chk.form_ii - chk.form_iii));
    if (!chk.ok) report.violations.push_back(chk.state);
  }
  return report;
}

}  // namespace stopgame
