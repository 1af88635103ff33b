#include "stopgame/game_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stopgame/errors.hpp"
#include "stopgame/kernels.hpp"

namespace stopgame {

namespace {

constexpr double kConservativeTol = 1e-12;  // per-row absolute, user literals

// Relative slack for certificate inequalities; drift sums accumulate
// roundoff proportional to the magnitudes involved.
double ineq_slack(double lhs, double rhs) {
  return 1e-9 * (1.0 + std::fabs(lhs) + std::fabs(rhs));
}

}  // namespace

double SparseRow::value_at(int j) const {
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] == j) return vals[k];
  }
  return 0.0;
}

double SparseRow::outflow(int diagonal_state) const {
  double total = 0.0;
  for (std::size_t k = 0; k < cols.size(); ++k) {
    if (cols[k] != diagonal_state) total += vals[k];
  }
  return total;
}

std::vector<double> GameModel::max_outflow() const {
  std::vector<double> q(num_states, 0.0);
  for (int i = 0; i < num_states; ++i) {
    for (int a = 0; a < num_actions_p1(); ++a) {
      for (int b = 0; b < num_actions_p2(); ++b) {
        q[i] = std::max(q[i], rate_row(i, a, b).outflow(i));
      }
    }
  }
  return q;
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "valid";
  std::ostringstream os;
  os << violations.size() << " violation(s); first: "
     << violations.front().message;
  return os.str();
}

ValidationReport validate_model(
    const GameModel& model, const std::optional<LyapunovCertificate>& cert) {
  ValidationReport report;
  auto add = [&report](std::string invariant, int i, int a, int b, int j,
                       double mag, std::string msg) {
    report.violations.push_back(
        {std::move(invariant), i, a, b, j, mag, std::move(msg)});
  };

  if (model.num_states < 1) {
    add("shape", -1, -1, -1, -1, 0.0, "num_states must be positive");
    return report;
  }
  if (model.actions_p1.empty() || model.actions_p2.empty()) {
    add("shape", -1, -1, -1, -1, 0.0, "both action sets must be non-empty");
    return report;
  }
  const std::size_t expected_rows =
      static_cast<std::size_t>(model.num_states) * model.actions_p1.size() *
      model.actions_p2.size();
  if (model.rates.size() != expected_rows ||
      model.reward.size() != expected_rows ||
      model.psi1.size() != static_cast<std::size_t>(model.num_states) ||
      model.psi2.size() != static_cast<std::size_t>(model.num_states)) {
    add("shape", -1, -1, -1, -1, 0.0,
        "rates/reward/psi arrays do not match num_states and action counts");
    return report;
  }
  if (!(model.alpha > 0.0)) {
    add("alpha", -1, -1, -1, -1, model.alpha, "discount alpha must be > 0");
  }

  for (int i = 0; i < model.num_states; ++i) {
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const SparseRow& row = model.rate_row(i, a, b);
        double row_sum = 0.0;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          const int j = row.cols[k];
          const double q = row.vals[k];
          if (j < 0 || j >= model.num_states) {
            std::ostringstream os;
            os << "rate destination " << j << " out of range at (" << i << ","
               << a << "," << b << ")";
            add("rate_range", i, a, b, j, q, os.str());
            continue;
          }
          if (j != i && q < 0.0) {
            std::ostringstream os;
            os << "negative off-diagonal rate q(" << j << "|" << i << "," << a
               << "," << b << ") = " << q;
            add("offdiagonal_sign", i, a, b, j, q, os.str());
          }
          row_sum += q;
        }
        if (std::fabs(row_sum) > kConservativeTol) {
          std::ostringstream os;
          os << "non-conservative row at (" << i << "," << a << "," << b
             << "): sum = " << row_sum;
          add("conservative", i, a, b, -1, row_sum, os.str());
        }
        const double r = model.reward_rate(i, a, b);
        if (r < 0.0) {
          std::ostringstream os;
          os << "negative reward r(" << i << "," << a << "," << b
             << ") = " << r;
          add("reward_sign", i, a, b, -1, r, os.str());
        }
      }
    }
    if (model.psi1[i] < 0.0) {
      add("psi_sign", i, -1, -1, -1, model.psi1[i], "psi1 negative");
    }
    if (model.psi2[i] < 0.0) {
      add("psi_sign", i, -1, -1, -1, model.psi2[i], "psi2 negative");
    }
    if (!(model.psi2[i] < model.psi1[i])) {
      std::ostringstream os;
      os << "psi2(" << i << ") = " << model.psi2[i]
         << " not strictly below psi1(" << i << ") = " << model.psi1[i];
      add("psi_separation", i, -1, -1, -1, model.psi2[i] - model.psi1[i],
          os.str());
    }
  }

  report.max_outflow = model.max_outflow();

  if (report.ok()) {
    LyapunovCertificate certificate =
        cert.has_value() ? *cert : auto_certificate(model);
    auto cert_violations = check_certificate(model, certificate);
    for (auto& v : cert_violations) report.violations.push_back(std::move(v));
    report.certificate = std::move(certificate);
  }
  return report;
}

void require_valid(const GameModel& model) {
  ValidationReport report = validate_model(model);
  if (!report.ok()) {
    throw Error(ErrorCode::kRejected, report.violations.front().message);
  }
}

std::vector<Violation> check_certificate(const GameModel& model,
                                         const LyapunovCertificate& cert) {
  std::vector<Violation> out;
  auto add = [&out](std::string invariant, int i, int a, int b, double mag,
                    std::string msg) {
    out.push_back({std::move(invariant), i, a, b, -1, mag, std::move(msg)});
  };

  const std::size_t n = static_cast<std::size_t>(model.num_states);
  if (cert.w.empty() || cert.W.size() != n || cert.W_tilde.size() != n) {
    add("certificate_shape", -1, -1, -1, 0.0,
        "certificate arrays do not match the state count");
    return out;
  }
  for (const auto& wn : cert.w) {
    if (wn.size() != n) {
      add("certificate_shape", -1, -1, -1, 0.0, "w_n has wrong length");
      return out;
    }
  }
  if (!(cert.M > 0.0) || !(cert.c > 0.0) || !(cert.c_tilde > 0.0)) {
    add("certificate_constants", -1, -1, -1, 0.0,
        "constants M, c, c_tilde must be positive");
  }

  const std::size_t N = cert.w.size();
  for (std::size_t i = 0; i < n; ++i) {
    double sum_w = 0.0;
    for (const auto& wn : cert.w) sum_w += wn[i];
    if (std::fabs(sum_w - cert.W[i]) > ineq_slack(sum_w, cert.W[i])) {
      add("W_sum", static_cast<int>(i), -1, -1, sum_w - cert.W[i],
          "W is not the sum of the w_n chain");
    }
    for (const auto& wn : cert.w) {
      if (wn[i] < 0.0) {
        add("w_sign", static_cast<int>(i), -1, -1, wn[i],
            "certificate functions must be nonnegative");
      }
    }
    if (cert.W_tilde[i] < 0.0) {
      add("w_sign", static_cast<int>(i), -1, -1, cert.W_tilde[i],
          "W_tilde must be nonnegative");
    }
  }

  const std::vector<double> q = model.max_outflow();
  for (int i = 0; i < model.num_states; ++i) {
    if (q[i] > cert.c * cert.W[i] + ineq_slack(q[i], cert.c * cert.W[i])) {
      std::ostringstream os;
      os << "q(" << i << ") = " << q[i] << " exceeds c*W = "
         << cert.c * cert.W[i];
      add("rate_growth", i, -1, -1, q[i] - cert.c * cert.W[i], os.str());
    }
    if (model.psi1[i] >
        cert.M * cert.W[i] + ineq_slack(model.psi1[i], cert.M * cert.W[i])) {
      add("psi1_growth", i, -1, -1, model.psi1[i] - cert.M * cert.W[i],
          "psi1 exceeds M*W");
    }
    const double qw = q[i] * cert.W[i];
    if (qw > cert.M * cert.W_tilde[i] +
                 ineq_slack(qw, cert.M * cert.W_tilde[i])) {
      add("qW_growth", i, -1, -1, qw - cert.M * cert.W_tilde[i],
          "q(i)*W(i) exceeds M*W_tilde");
    }
  }

  for (int i = 0; i < model.num_states; ++i) {
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const SparseRow& row = model.rate_row(i, a, b);
        for (std::size_t nidx = 0; nidx < N; ++nidx) {
          double drift = 0.0;
          for (std::size_t k = 0; k < row.cols.size(); ++k) {
            drift += row.vals[k] * cert.w[nidx][row.cols[k]];
          }
          const double bound =
              nidx + 1 < N ? cert.w[nidx + 1][i] : 0.0;
          if (drift > bound + ineq_slack(drift, bound)) {
            std::ostringstream os;
            os << "drift of w_" << (nidx + 1) << " at (" << i << "," << a
               << "," << b << ") = " << drift << " exceeds "
               << (nidx + 1 < N ? "w_next" : "0");
            add("lyapunov_drift", i, a, b, drift - bound, os.str());
          }
        }
        const double r = model.reward_rate(i, a, b);
        if (r > cert.M * cert.W[i] + ineq_slack(r, cert.M * cert.W[i])) {
          add("reward_growth", i, a, b, r - cert.M * cert.W[i],
              "reward exceeds M*W");
        }
        double drift_tilde = 0.0;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          drift_tilde += row.vals[k] * cert.W_tilde[row.cols[k]];
        }
        const double bound = cert.c * cert.W_tilde[i] + cert.c_tilde;
        if (drift_tilde > bound + ineq_slack(drift_tilde, bound)) {
          add("W_tilde_drift", i, a, b, drift_tilde - bound,
              "W_tilde drift exceeds c*W_tilde + c_tilde");
        }
      }
    }
  }
  return out;
}

LyapunovCertificate complete_certificate(const GameModel& model,
                                         std::vector<std::vector<double>> w) {
  LyapunovCertificate cert;
  cert.w = std::move(w);
  const std::size_t n = static_cast<std::size_t>(model.num_states);
  cert.W.assign(n, 0.0);
  for (const auto& wn : cert.w) {
    for (std::size_t i = 0; i < n; ++i) cert.W[i] += wn[i];
  }

  const std::vector<double> q = model.max_outflow();
  double q_max = 0.0;
  for (double qi : q) q_max = std::max(q_max, qi);
  const double tilde_scale = std::max(1.0, q_max);
  cert.W_tilde.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    cert.W_tilde[i] = tilde_scale * cert.W[i];
  }

  // Smallest constants making the growth bounds hold. W > 0 is required for
  // the ratios; a zero W entry will surface as a growth violation later, so
  // guard the division only.
  double M = 1.0;
  double c = 1.0;
  for (int i = 0; i < model.num_states; ++i) {
    const double Wi = cert.W[i] > 0.0 ? cert.W[i] : 1.0;
    c = std::max(c, q[i] / Wi);
    M = std::max(M, model.psi1[i] / Wi);
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        M = std::max(M, model.reward_rate(i, a, b) / Wi);
      }
    }
    // q(i)*W(i) <= M * W_tilde(i) given W_tilde = tilde_scale * W.
    M = std::max(M, q[i] / tilde_scale);
  }
  cert.M = M;
  cert.c = c;
  cert.c_tilde = 1.0;
  return cert;
}

LyapunovCertificate auto_certificate(const GameModel& model) {
  double kappa = 1.0;
  for (double p : model.psi1) kappa = std::max(kappa, p);
  for (double r : model.reward) kappa = std::max(kappa, r);
  std::vector<std::vector<double>> chain(
      1, std::vector<double>(model.num_states, kappa));
  return complete_certificate(model, std::move(chain));
}

GameModel truncate_model(const CountableModelSpec& spec, int s_max) {
  if (s_max < 1) {
    throw Error(ErrorCode::kInvalidArgument, "s_max must be >= 1");
  }
  GameModel model;
  model.num_states = s_max + 1;
  model.actions_p1 = spec.actions_p1;
  model.actions_p2 = spec.actions_p2;
  model.alpha = spec.alpha;
  const int na = model.num_actions_p1();
  const int nb = model.num_actions_p2();
  model.rates.resize(static_cast<std::size_t>(model.num_states) * na * nb);
  model.reward.resize(model.rates.size());
  model.psi1.resize(model.num_states);
  model.psi2.resize(model.num_states);

  for (int i = 0; i <= s_max; ++i) {
    model.psi1[i] = spec.psi1(i);
    model.psi2[i] = spec.psi2(i);
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) {
        SparseRow row;
        double kept_outflow = 0.0;
        for (const auto& [j, rate] : spec.off_diagonal_rates(i, a, b)) {
          if (j == i || rate == 0.0) continue;
          if (j < 0) {
            throw Error(ErrorCode::kInvalidArgument,
                        "off_diagonal_rates produced a negative state");
          }
          if (j > s_max) continue;  // reflected: mass dropped
          row.cols.push_back(j);
          row.vals.push_back(rate);
          kept_outflow += rate;
        }
        row.cols.push_back(i);
        row.vals.push_back(-kept_outflow);
        model.rates[model.row_index(i, a, b)] = std::move(row);
        model.reward[model.row_index(i, a, b)] = spec.reward(i, a, b);
      }
    }
  }
  return model;
}

double weighted_norm(const std::vector<double>& values,
                     const std::vector<double>& weight) {
  if (values.size() != weight.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "value and weight lengths differ");
  }
  for (std::size_t i = 0; i < weight.size(); ++i) {
    if (!(weight[i] > 0.0)) {
      throw Error(ErrorCode::kDegenerateWeight,
                  "weight must be strictly positive at state " +
                      std::to_string(i));
    }
  }
  if (values.empty()) return 0.0;
  return kernels::sup_abs_ratio(values, weight);
}

double weighted_norm(const ValueFunction& f) {
  if (!f.weight) {
    throw Error(ErrorCode::kDegenerateWeight, "value function has no weight");
  }
  return weighted_norm(f.values, *f.weight);
}

}  // namespace stopgame
