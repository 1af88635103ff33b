#pragma once

#include <string>
#include <vector>

#include "stopgame/dpi_solver.hpp"
#include "stopgame/evaluator.hpp"
#include "stopgame/game_model.hpp"

namespace stopgame {

// Rounds to `digits` significant digits. Artifact floats all pass through
// this so identical runs emit identical bytes.
double round_sig(double value, int digits = 12);

std::string solution_to_json_text(const EquilibriumSolution& sol);

// Rebuilds a solution from its JSON export. Classification falls back to
// obstacle contact against the supplied model when the field is absent.
EquilibriumSolution solution_from_json_text(const std::string& text,
                                            const GameModel& model,
                                            double tol = 1e-8);

EquilibriumSolution load_solution(const std::string& path,
                                  const GameModel& model, double tol = 1e-8);
void save_solution(const EquilibriumSolution& sol, const std::string& path);

std::string validation_report_to_json_text(const ValidationReport& report);
std::string dpi_report_to_json_text(const DPIReport& report);
std::string saddle_report_to_json_text(const SaddleCheckReport& report);
std::string payoff_estimate_to_json_text(const PayoffEstimate& estimate);
std::string error_to_json_text(const std::string& code,
                               const std::string& message);

}  // namespace stopgame
