#include "stopgame/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stopgame/errors.hpp"

namespace stopgame {

namespace {

constexpr double kPivotTol = 1e-11;

struct LpResult {
  std::vector<double> x;      // structural solution
  std::vector<double> duals;  // one per constraint
  double objective = 0.0;
};

// max 1^T x  s.t.  for each column b of M': sum_a M'(a,b) x_a <= 1, x >= 0.
// M' must be entrywise >= 1, which makes the slack basis feasible and the
// objective bounded. Bland's rule: deterministic and cycle-free.
LpResult solve_unit_lp(const MatrixGame& mp) {
  const int m = mp.rows;   // structural variables
  const int n = mp.cols;   // constraints
  const int width = m + n + 1;
  std::vector<double> tab(static_cast<std::size_t>(n + 1) * width, 0.0);
  auto at = [&tab, width](int r, int c) -> double& { return tab[r * width + c]; };

  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < m; ++a) at(b, a) = mp.at(a, b);
    at(b, m + b) = 1.0;
    at(b, m + n) = 1.0;
  }
  const int obj = n;  // objective row index
  for (int a = 0; a < m; ++a) at(obj, a) = 1.0;

  std::vector<int> basis(n);
  for (int b = 0; b < n; ++b) basis[b] = m + b;

  const long max_pivots = 10000L * (m + n);
  for (long iter = 0;; ++iter) {
    if (iter > max_pivots) {
      throw Error(ErrorCode::kLpInfeasible,
                  "simplex failed to terminate; internal bug");
    }
    int enter = -1;
    for (int c = 0; c < m + n; ++c) {
      if (at(obj, c) > kPivotTol) {
        enter = c;
        break;
      }
    }
    if (enter < 0) break;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < n; ++r) {
      const double coef = at(r, enter);
      if (coef > kPivotTol) {
        const double ratio = at(r, m + n) / coef;
        if (ratio < best_ratio - kPivotTol ||
            (ratio < best_ratio + kPivotTol && leave >= 0 &&
             basis[r] < basis[leave])) {
          best_ratio = ratio;
          leave = r;
        } else if (leave < 0) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) {
      // Cannot happen with M' >= 1: every structural column has positive
      // entries in all rows. Slack columns never re-enter unboundedly.
      throw Error(ErrorCode::kLpInfeasible,
                  "unbounded LP for a finite game; internal bug");
    }

    const double pivot = at(leave, enter);
    for (int c = 0; c < width; ++c) at(leave, c) /= pivot;
    for (int r = 0; r <= n; ++r) {
      if (r == leave) continue;
      const double factor = at(r, enter);
      if (factor == 0.0) continue;
      for (int c = 0; c < width; ++c) at(r, c) -= factor * at(leave, c);
    }
    basis[leave] = enter;
  }

  LpResult res;
  res.x.assign(m, 0.0);
  for (int r = 0; r < n; ++r) {
    if (basis[r] < m) res.x[basis[r]] = at(r, m + n);
  }
  res.duals.resize(n);
  for (int b = 0; b < n; ++b) res.duals[b] = -at(obj, m + b);
  res.objective = -at(obj, m + n);
  return res;
}

// Clips pivoting dust and renormalizes to a probability vector.
std::vector<double> as_distribution(std::vector<double> v) {
  double total = 0.0;
  for (double& p : v) {
    if (p < 0.0) {
      if (p < -1e-9) {
        throw Error(ErrorCode::kLpInfeasible,
                    "negative probability mass from the LP; internal bug");
      }
      p = 0.0;
    }
    total += p;
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCode::kLpInfeasible,
                "zero probability mass from the LP; internal bug");
  }
  for (double& p : v) p /= total;
  return v;
}

void validate(const MatrixGame& game) {
  if (game.rows < 1 || game.cols < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "matrix game needs at least one row and one column");
  }
  if (game.payoff.size() !=
      static_cast<std::size_t>(game.rows) * game.cols) {
    throw Error(ErrorCode::kInvalidArgument,
                "payoff size does not match rows*cols");
  }
  for (double v : game.payoff) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "matrix game entries must be finite");
    }
  }
}

}  // namespace

MatrixGame MatrixGame::from_rows(const std::vector<std::vector<double>>& data) {
  MatrixGame g;
  g.rows = static_cast<int>(data.size());
  g.cols = data.empty() ? 0 : static_cast<int>(data.front().size());
  g.payoff.reserve(static_cast<std::size_t>(g.rows) * g.cols);
  for (const auto& row : data) {
    if (static_cast<int>(row.size()) != g.cols) {
      throw Error(ErrorCode::kInvalidArgument, "ragged payoff rows");
    }
    g.payoff.insert(g.payoff.end(), row.begin(), row.end());
  }
  return g;
}

SaddleCertificate certify(const MatrixGame& game, const GameSolution& sol) {
  SaddleCertificate cert;
  cert.minimizer_cap = -std::numeric_limits<double>::infinity();
  for (int b = 0; b < game.cols; ++b) {
    double col = 0.0;
    for (int a = 0; a < game.rows; ++a) col += sol.mu[a] * game.at(a, b);
    cert.minimizer_cap = std::max(cert.minimizer_cap, col);
  }
  cert.maximizer_floor = std::numeric_limits<double>::infinity();
  for (int a = 0; a < game.rows; ++a) {
    double row = 0.0;
    for (int b = 0; b < game.cols; ++b) row += sol.nu[b] * game.at(a, b);
    cert.maximizer_floor = std::min(cert.maximizer_floor, row);
  }
  cert.gap = cert.minimizer_cap - cert.maximizer_floor;
  return cert;
}

GameSolution solve_matrix_game(const MatrixGame& game) {
  validate(game);
  GameSolution sol;

  if (game.rows == 1) {
    int best = 0;
    for (int b = 1; b < game.cols; ++b) {
      if (game.at(0, b) > game.at(0, best)) best = b;
    }
    sol.value = game.at(0, best);
    sol.mu = {1.0};
    sol.nu.assign(game.cols, 0.0);
    sol.nu[best] = 1.0;
    return sol;
  }
  if (game.cols == 1) {
    int best = 0;
    for (int a = 1; a < game.rows; ++a) {
      if (game.at(a, 0) < game.at(best, 0)) best = a;
    }
    sol.value = game.at(best, 0);
    sol.nu = {1.0};
    sol.mu.assign(game.rows, 0.0);
    sol.mu[best] = 1.0;
    return sol;
  }

  const double min_entry =
      *std::min_element(game.payoff.begin(), game.payoff.end());
  const double shift = 1.0 + std::fabs(min_entry);
  MatrixGame shifted = game;
  for (double& v : shifted.payoff) v += shift;

  const LpResult lp = solve_unit_lp(shifted);
  if (!(lp.objective > 0.0)) {
    throw Error(ErrorCode::kLpInfeasible,
                "nonpositive LP objective for a positive game; internal bug");
  }
  const double shifted_value = 1.0 / lp.objective;
  sol.value = shifted_value - shift;
  std::vector<double> mu = lp.x;
  for (double& p : mu) p *= shifted_value;
  std::vector<double> nu = lp.duals;
  for (double& p : nu) p *= shifted_value;
  sol.mu = as_distribution(std::move(mu));
  sol.nu = as_distribution(std::move(nu));
  return sol;
}

}  // namespace stopgame
