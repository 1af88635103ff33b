#include "stopgame/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stopgame/errors.hpp"

namespace stopgame {

using nlohmann::json;

double round_sig(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

namespace {

json rounded_array(const std::vector<double>& values) {
  json arr = json::array();
  for (double v : values) arr.push_back(round_sig(v));
  return arr;
}

json rounded_matrix(const std::vector<std::vector<double>>& rows) {
  json arr = json::array();
  for (const auto& row : rows) arr.push_back(rounded_array(row));
  return arr;
}

}  // namespace

std::string solution_to_json_text(const EquilibriumSolution& sol) {
  json doc;
  doc["u_star"] = rounded_array(sol.u_star.values);
  doc["phi_star"] = rounded_matrix(sol.phi_star);
  doc["psi_star"] = rounded_matrix(sol.psi_star);
  doc["A1"] = sol.region_a1;
  doc["A2"] = sol.region_a2;
  json classes = json::array();
  for (StateClass c : sol.classification) classes.push_back(state_class_name(c));
  doc["classification"] = std::move(classes);
  doc["iterations"] = sol.iterations;
  doc["residual"] = round_sig(sol.residual);
  return doc.dump(2);
}

namespace {

EquilibriumSolution solution_from_parsed(const json& doc,
                                         const GameModel& model, double tol);

}  // namespace

EquilibriumSolution solution_from_json_text(const std::string& text,
                                            const GameModel& model,
                                            double tol) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    return solution_from_parsed(doc, model, tol);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
}

namespace {

EquilibriumSolution solution_from_parsed(const json& doc,
                                         const GameModel& model, double tol) {
  EquilibriumSolution sol;
  if (!doc.contains("u_star")) {
    throw Error(ErrorCode::kParseError, "missing field 'u_star'");
  }
  sol.u_star.values = doc["u_star"].get<std::vector<double>>();
  if (sol.u_star.values.size() != static_cast<std::size_t>(model.num_states)) {
    throw Error(ErrorCode::kParseError,
                "u_star length does not match the model");
  }
  if (doc.contains("phi_star")) {
    sol.phi_star = doc["phi_star"].get<std::vector<std::vector<double>>>();
  }
  if (doc.contains("psi_star")) {
    sol.psi_star = doc["psi_star"].get<std::vector<std::vector<double>>>();
  }
  if (doc.contains("iterations")) sol.iterations = doc["iterations"].get<long>();
  if (doc.contains("residual")) sol.residual = doc["residual"].get<double>();

  if (doc.contains("classification")) {
    for (const json& name : doc["classification"]) {
      sol.classification.push_back(
          state_class_from_name(name.get<std::string>()));
    }
    if (sol.classification.size() != sol.u_star.values.size()) {
      throw Error(ErrorCode::kParseError, "classification length mismatch");
    }
  } else {
    sol.classification.resize(model.num_states);
    for (int i = 0; i < model.num_states; ++i) {
      const double u = sol.u_star.values[i];
      const double eps = contact_epsilon(tol, model.psi1[i], model.psi2[i]);
      if (std::fabs(u - model.psi1[i]) <= eps) {
        sol.classification[i] = StateClass::kStopP1;
      } else if (std::fabs(u - model.psi2[i]) <= eps) {
        sol.classification[i] = StateClass::kStopP2;
      } else {
        sol.classification[i] = StateClass::kContinuation;
      }
    }
  }
  sol.region_a1.clear();
  sol.region_a2.clear();
  for (int i = 0; i < model.num_states; ++i) {
    if (sol.classification[i] == StateClass::kStopP1) sol.region_a1.push_back(i);
    if (sol.classification[i] == StateClass::kStopP2) sol.region_a2.push_back(i);
  }
  return sol;
}

}  // namespace

EquilibriumSolution load_solution(const std::string& path,
                                  const GameModel& model, double tol) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParseError, "cannot open solution file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return solution_from_json_text(buffer.str(), model, tol);
}

void save_solution(const EquilibriumSolution& sol, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kParseError, "cannot open for writing: " + path);
  }
  out << solution_to_json_text(sol) << '\n';
}

std::string validation_report_to_json_text(const ValidationReport& report) {
  json doc;
  doc["valid"] = report.ok();
  json violations = json::array();
  for (const Violation& v : report.violations) {
    violations.push_back({{"invariant", v.invariant},
                          {"state", v.state},
                          {"a", v.a},
                          {"b", v.b},
                          {"dest", v.dest},
                          {"magnitude", round_sig(v.magnitude)},
                          {"message", v.message}});
  }
  doc["violations"] = std::move(violations);
  doc["max_outflow"] = rounded_array(report.max_outflow);
  if (report.certificate.has_value()) {
    const LyapunovCertificate& cert = *report.certificate;
    json c;
    c["N"] = cert.w.size();
    c["W"] = rounded_array(cert.W);
    c["W_tilde"] = rounded_array(cert.W_tilde);
    c["M"] = round_sig(cert.M);
    c["c"] = round_sig(cert.c);
    c["c_tilde"] = round_sig(cert.c_tilde);
    doc["certificate"] = std::move(c);
  }
  return doc.dump(2);
}

std::string dpi_report_to_json_text(const DPIReport& report) {
  json doc;
  doc["ok"] = report.ok();
  doc["violations"] = report.violations;
  doc["max_form_disagreement"] = round_sig(report.max_form_disagreement);
  json states = json::array();
  for (const DPIStateCheck& chk : report.states) {
    states.push_back({{"state", chk.state},
                      {"class", state_class_name(chk.klass)},
                      {"u", round_sig(chk.u)},
                      {"i_alpha", round_sig(chk.i_alpha)},
                      {"gap", round_sig(chk.gap)},
                      {"h_gap", round_sig(chk.h_gap)},
                      {"ok", chk.ok},
                      {"detail", chk.detail}});
  }
  doc["states"] = std::move(states);
  return doc.dump(2);
}

std::string saddle_report_to_json_text(const SaddleCheckReport& report) {
  json doc;
  doc["ok"] = report.ok();
  doc["tol"] = round_sig(report.tol);
  doc["max_gain_p2"] = round_sig(report.max_gain_p2);
  doc["max_gain_p1"] = round_sig(report.max_gain_p1);
  doc["br_gap_p2"] = round_sig(report.br_gap_p2);
  doc["br_gap_p1"] = round_sig(report.br_gap_p1);
  doc["consistency_gap"] = round_sig(report.consistency_gap);
  doc["deviations_checked"] = report.deviations_checked;
  json worst = json::array();
  for (const DeviationRecord& rec : report.worst) {
    worst.push_back({{"deviator", rec.deviator == Player::kP1 ? "P1" : "P2"},
                     {"kind", rec.kind == 0 ? "random_mixture" : "region_toggle"},
                     {"toggled_state", rec.toggled_state},
                     {"worst_gain", round_sig(rec.worst_gain)},
                     {"worst_state", rec.worst_state}});
  }
  doc["violations"] = std::move(worst);
  return doc.dump(2);
}

std::string payoff_estimate_to_json_text(const PayoffEstimate& estimate) {
  json doc;
  doc["method"] =
      estimate.method == EstimateMethod::kExact ? "EXACT" : "MONTE_CARLO";
  json values = json::array();
  for (std::size_t i = 0; i < estimate.values.size(); ++i) {
    if (!estimate.has_value.empty() && !estimate.has_value[i]) {
      values.push_back(nullptr);
    } else {
      values.push_back(round_sig(estimate.values[i]));
    }
  }
  doc["values"] = std::move(values);
  if (estimate.method == EstimateMethod::kMonteCarlo) {
    json errs = json::array();
    for (std::size_t i = 0; i < estimate.stderrs.size(); ++i) {
      if (!estimate.has_value.empty() && !estimate.has_value[i]) {
        errs.push_back(nullptr);
      } else {
        errs.push_back(round_sig(estimate.stderrs[i]));
      }
    }
    doc["stderr"] = std::move(errs);
    doc["paths"] = estimate.paths;
  } else {
    doc["linear_residual"] = round_sig(estimate.linear_residual);
  }
  return doc.dump(2);
}

std::string error_to_json_text(const std::string& code,
                               const std::string& message) {
  json doc;
  doc["error"] = {{"code", code}, {"message", message}};
  return doc.dump(2);
}

}  // namespace stopgame
