#pragma once

#include <string>
#include <vector>

#include "stopgame/game_model.hpp"
#include "stopgame/matrix_game.hpp"

namespace stopgame {

// Discrete-time reformulation of the rate model: per-(i,a,b) stochastic
// kernel rows, per-(i,a,b) stage rewards r/(alpha+q(i)+theta) and per-state
// stage discounts (q(i)+theta)/(alpha+q(i)+theta). Kernel rows are stored
// dense so the solver inner loop is a straight dot product.
struct UniformizedModel {
  int num_states = 0;
  int na = 0;
  int nb = 0;
  double alpha = 0.0;
  double theta = 1.0;
  std::vector<double> q;               // per-state max outflow
  std::vector<double> stage_discount;  // per state
  std::vector<double> stage_reward;    // per (i,a,b)
  std::vector<double> kernel;          // dense rows, (i,a,b) major
  std::vector<double> psi1;
  std::vector<double> psi2;

  std::size_t row_index(int i, int a, int b) const {
    return (static_cast<std::size_t>(i) * na + a) * nb + b;
  }
  const double* kernel_row(int i, int a, int b) const {
    return kernel.data() + row_index(i, a, b) * num_states;
  }
};

UniformizedModel uniformize(const GameModel& model, double theta = 1.0);

enum class StateClass { kContinuation, kStopP1, kStopP2 };

const char* state_class_name(StateClass c);
StateClass state_class_from_name(const std::string& name);

struct EquilibriumSolution {
  ValueFunction u_star;
  std::vector<std::vector<double>> phi_star;  // minimizer mixtures over U
  std::vector<std::vector<double>> psi_star;  // maximizer mixtures over V
  std::vector<int> region_a1;                 // u* = psi1 (minimizer stops)
  std::vector<int> region_a2;                 // u* = psi2 (maximizer stops)
  std::vector<StateClass> classification;
  long iterations = 0;
  double residual = 0.0;
};

// Stage game at state i given a continuation estimate phi:
// entry (a,b) = stage_reward(i,a,b) + stage_discount(i) * <kernel row, phi>.
// Its mixed value is the uniformized one-step operator at i.
MatrixGame stage_payoff_matrix(const UniformizedModel& um, int i,
                               const std::vector<double>& phi);

struct SweepResult {
  std::vector<double> values;        // clamped between psi2 and psi1
  std::vector<double> stage_values;  // unclamped one-step values
  std::vector<GameSolution> games;
};

// One sweep of the clamped operator: solve each state's stage game, then
// pin the value between the obstacles.
SweepResult apply_T(const UniformizedModel& um,
                    const std::vector<double>& phi);

struct SolveOptions {
  double tol = 1e-8;
  long max_iter = 100000;
  // Iteration starts at the lower obstacle (the monotone scheme). Starting
  // at the upper obstacle gives the downward probe used by the uniqueness
  // tests; monotonicity is then checked in the opposite direction.
  enum class Start { kLowerObstacle, kUpperObstacle };
  Start start = Start::kLowerObstacle;
};

// Iterates u_{n+1} = T(u_n) until both the successive difference and the
// fixed-point residual fall below tol in the W-weighted sup norm. Strategies
// and stopping regions are extracted from the stage games at the final
// iterate. Throws kMaxIterExceeded (with the last residual in the message)
// or kMonotonicityViolation.
EquilibriumSolution value_iterate(const UniformizedModel& um,
                                  const std::vector<double>& weight,
                                  const SolveOptions& opts = {});

// Contact tolerance for classifying u* against an obstacle.
double contact_epsilon(double tol, double psi1, double psi2);

struct DPIStateCheck {
  int state = 0;
  StateClass klass = StateClass::kContinuation;
  double u = 0.0;
  double i_alpha = 0.0;     // uniformized one-step value at u*
  double gap = 0.0;         // u - i_alpha
  double h_gap = 0.0;       // alpha*u - H_alpha(i, u*)
  double form_ii = 0.0;     // min{max{I; psi2}; psi1}
  double form_iii = 0.0;    // max{min{I; psi1}; psi2}
  bool ok = true;
  std::string detail;
};

struct DPIReport {
  std::vector<DPIStateCheck> states;
  std::vector<int> violations;  // states that failed any check
  double max_form_disagreement = 0.0;

  bool ok() const { return violations.empty(); }
};

// Verifies the three-way bilateral inequalities at u* in both the
// uniformized form (u vs I_alpha) and the rate form (alpha*u vs H_alpha,
// tolerance rescaled by alpha+q(i)+theta), plus agreement of the two
// clamped fixed-point forms with u*.
DPIReport verify_dpi(const UniformizedModel& um, const GameModel& model,
                     const EquilibriumSolution& sol, double tol);

}  // namespace stopgame
