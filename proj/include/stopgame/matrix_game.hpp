#pragma once

#include <cstddef>
#include <vector>

namespace stopgame {

// Finite zero-sum matrix game. Rows are the minimizer's pure actions, columns
// the maximizer's; entry (a, b) is the payoff to the maximizer.
struct MatrixGame {
  int rows = 0;
  int cols = 0;
  std::vector<double> payoff;  // row-major

  double at(int a, int b) const { return payoff[a * cols + b]; }
  double& at(int a, int b) { return payoff[a * cols + b]; }

  static MatrixGame from_rows(const std::vector<std::vector<double>>& data);
};

struct GameSolution {
  double value = 0.0;
  std::vector<double> mu;  // minimizer's optimal mixture over rows
  std::vector<double> nu;  // maximizer's optimal mixture over columns
};

// What each mixture guarantees against any opponent reply: the minimizer's
// cap max_b (mu^T A)_b, the maximizer's floor min_a (A nu)_a, and their gap
// (nonnegative; zero at a saddle point).
struct SaddleCertificate {
  double minimizer_cap = 0.0;
  double maximizer_floor = 0.0;
  double gap = 0.0;
};

SaddleCertificate certify(const MatrixGame& game, const GameSolution& sol);

// Value plus optimal mixed strategies. 1xN and Nx1 games are solved by direct
// max/min; otherwise the game is shifted to strict positivity and solved by
// the standard linear program (Bland pivoting, so ties break the same way on
// every run).
GameSolution solve_matrix_game(const MatrixGame& game);

}  // namespace stopgame
