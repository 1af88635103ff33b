#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stopgame {

// One generator row q(.|i,a,b), sparse over destination states. The diagonal
// entry is stored explicitly.
struct SparseRow {
  std::vector<int> cols;
  std::vector<double> vals;

  double value_at(int j) const;
  // Sum of off-diagonal entries, i.e. the total outflow rate.
  double outflow(int diagonal_state) const;
};

// Zero-sum stochastic game on a finite continuous-time Markov chain. Player I
// (action set actions_p1) minimizes, player II (actions_p2) maximizes. Either
// player may stop the process: stopping by player I pays psi1, stopping by
// player II pays psi2. Immutable after construction.
struct GameModel {
  int num_states = 0;
  std::vector<std::string> actions_p1;
  std::vector<std::string> actions_p2;
  std::vector<SparseRow> rates;   // indexed by row_index(i, a, b)
  std::vector<double> reward;     // payoff/unit-time to player II, same index
  std::vector<double> psi1;
  std::vector<double> psi2;
  double alpha = 1.0;

  int num_actions_p1() const { return static_cast<int>(actions_p1.size()); }
  int num_actions_p2() const { return static_cast<int>(actions_p2.size()); }

  std::size_t row_index(int i, int a, int b) const {
    return (static_cast<std::size_t>(i) * actions_p1.size() + a) *
               actions_p2.size() +
           b;
  }

  const SparseRow& rate_row(int i, int a, int b) const {
    return rates[row_index(i, a, b)];
  }
  double reward_rate(int i, int a, int b) const {
    return reward[row_index(i, a, b)];
  }

  // Per-state stability constant q(i) = max over (a,b) of the outflow rate.
  std::vector<double> max_outflow() const;
};

// Witness for the drift conditions that make a model non-explosive and give
// the weighted norm its weight. On finite models one can always be built.
struct LyapunovCertificate {
  std::vector<std::vector<double>> w;  // w_1 .. w_N, each state-indexed
  std::vector<double> W;               // w_1 + ... + w_N
  std::vector<double> W_tilde;
  double M = 0.0;
  double c = 0.0;
  double c_tilde = 0.0;
};

struct ValueFunction {
  std::vector<double> values;
  std::shared_ptr<const std::vector<double>> weight;
};

struct Violation {
  std::string invariant;
  int state = -1;
  int a = -1;
  int b = -1;
  int dest = -1;
  double magnitude = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<double> max_outflow;                // q(i), recorded per state
  std::optional<LyapunovCertificate> certificate;  // supplied or auto-built

  bool ok() const { return violations.empty(); }
  std::string summary() const;
};

// Checks the model invariants (sign conditions, conservativeness within
// 1e-12 per row, strict psi2 < psi1) and the certificate inequalities. When
// no certificate is supplied a trivial constant one is constructed and
// re-checked through the same inequality scan.
ValidationReport validate_model(
    const GameModel& model,
    const std::optional<LyapunovCertificate>& cert = std::nullopt);

// Throws Error(kRejected) with the first violation if the model is invalid.
void require_valid(const GameModel& model);

// Re-evaluates every certificate inequality row by row against the model.
std::vector<Violation> check_certificate(const GameModel& model,
                                         const LyapunovCertificate& cert);

// Completes a drift chain w_1..w_N into a full certificate: W is the chain
// sum, W_tilde = max(1, max_i q(i)) * W, and M, c, c_tilde are the smallest
// natural constants. The chain itself is not altered; callers must pick one
// whose drift inequalities hold (check_certificate verifies).
LyapunovCertificate complete_certificate(const GameModel& model,
                                         std::vector<std::vector<double>> w);

// The trivial chain: N = 1, w_1 constant at max(1, max psi1, max reward).
LyapunovCertificate auto_certificate(const GameModel& model);

// Rate/reward/obstacle rules for a conceptually countable state space.
// off_diagonal_rates may name destinations past any truncation level.
struct CountableModelSpec {
  std::vector<std::string> actions_p1;
  std::vector<std::string> actions_p2;
  double alpha = 1.0;
  std::function<std::vector<std::pair<int, double>>(int i, int a, int b)>
      off_diagonal_rates;
  std::function<double(int i, int a, int b)> reward;
  std::function<double(int i)> psi1;
  std::function<double(int i)> psi2;
};

// Restricts the spec to states {0..s_max}. Rate mass to states beyond s_max
// is dropped and the diagonal rebalanced, so every row stays conservative
// (reflecting truncation).
GameModel truncate_model(const CountableModelSpec& spec, int s_max);

// sup-norm weighted by W: max_i |f(i)| / W(i). Throws kDegenerateWeight if
// any W(i) <= 0.
double weighted_norm(const std::vector<double>& values,
                     const std::vector<double>& weight);
double weighted_norm(const ValueFunction& f);

}  // namespace stopgame
