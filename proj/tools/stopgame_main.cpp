// Command-line front end: validate, solve, verify, simulate, bench,
// queue-demo. Artifacts are JSON/CSV files under --out; floats are fixed at
// 12 significant digits so identical runs produce identical bytes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "stopgame/dpi_solver.hpp"
#include "stopgame/errors.hpp"
#include "stopgame/evaluator.hpp"
#include "stopgame/game_model.hpp"
#include "stopgame/models.hpp"
#include "stopgame/serialize.hpp"
#include "stopgame/simulator.hpp"

namespace fs = std::filesystem;
using namespace stopgame;

namespace {

std::string fmt12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

struct CommonOpts {
  std::string model_path;
  std::string queue_spec_path;
  int smax_override = -1;
  double tol = 1e-8;
  long max_iter = 100000;
  double theta = 1.0;
  std::uint64_t seed = 0;
  long paths = 10000;
  int initial = 0;
  int deviations = 100;
  double dpi_tol = 1e-7;
  double check_tol = 1e-6;
  std::string out_dir = ".";
  std::vector<std::string> formats = {"json", "csv"};

  bool wants(const std::string& fmt) const {
    for (const auto& f : formats) {
      if (f == fmt) return true;
    }
    return false;
  }
};

void add_model_flags(CLI::App* cmd, CommonOpts& opts) {
  auto* model = cmd->add_option(
      "--model", opts.model_path,
      "model JSON file (default: the built-in queue spec)");
  auto* qspec = cmd->add_option("--queue-spec", opts.queue_spec_path,
                                "queue generator parameter JSON");
  model->excludes(qspec);
  cmd->add_option("--smax", opts.smax_override,
                  "override the queue truncation level");
}

void add_solver_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--tol", opts.tol, "convergence tolerance (weighted norm)");
  cmd->add_option("--max-iter", opts.max_iter, "iteration budget");
  cmd->add_option("--theta", opts.theta, "uniformization constant");
}

void add_output_flags(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--out", opts.out_dir, "output directory");
  cmd->add_option("--format", opts.formats, "artifact formats (json, csv)")
      ->delimiter(',');
}

QueueSpec queue_spec_from_parsed(const nlohmann::json& doc);

QueueSpec queue_spec_from_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParseError, "cannot open queue spec: " + path);
  }
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParseError, std::string(e.what()));
  }
  try {
    return queue_spec_from_parsed(doc);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string(e.what()));
  }
}

QueueSpec queue_spec_from_parsed(const nlohmann::json& doc) {
  QueueSpec spec;
  const double lambda0 = doc.value("lambda", 1.0);
  const double mu0 = doc.value("mu", 1.5);
  spec.lambda = [lambda0](int) { return lambda0; };
  spec.mu = [mu0](int) { return mu0; };
  if (doc.contains("h")) spec.h = doc["h"].get<std::vector<double>>();
  if (doc.contains("g")) spec.g = doc["g"].get<std::vector<double>>();
  if (doc.contains("actions_p1")) {
    spec.actions_p1 = doc["actions_p1"].get<std::vector<std::string>>();
  } else if (spec.h.size() != spec.actions_p1.size()) {
    spec.actions_p1.clear();
    for (std::size_t a = 0; a < spec.h.size(); ++a) {
      spec.actions_p1.push_back("a" + std::to_string(a));
    }
  }
  if (doc.contains("actions_p2")) {
    spec.actions_p2 = doc["actions_p2"].get<std::vector<std::string>>();
  } else if (spec.g.size() != spec.actions_p2.size()) {
    spec.actions_p2.clear();
    for (std::size_t b = 0; b < spec.g.size(); ++b) {
      spec.actions_p2.push_back("b" + std::to_string(b));
    }
  }
  spec.c = doc.value("c", spec.c);
  spec.r_lin = doc.value("r_lin", spec.r_lin);
  const double c1_coeff = doc.value("c1_coeff", 0.2);
  const double c2_coeff = doc.value("c2_coeff", 0.1);
  const std::vector<double> h = spec.h;
  const std::vector<double> g = spec.g;
  spec.c1 = [c1_coeff, h](int, int a) { return c1_coeff * h[a]; };
  spec.c2 = [c2_coeff, g](int, int b) { return c2_coeff * g[b]; };
  spec.c_bar = doc.value("c_bar", spec.c_bar);
  const double r_coeff = doc.value("R_coeff", 0.1);
  spec.R = [r_coeff](int i) { return r_coeff * i; };
  spec.c_prime = doc.value("c_prime", spec.c_prime);
  spec.alpha = doc.value("alpha", spec.alpha);
  spec.s_max = doc.value("s_max", spec.s_max);
  return spec;
}

struct LoadedModel {
  GameModel model;
  std::optional<LyapunovCertificate> certificate;  // queue models get affine
};

LoadedModel acquire_model(const CommonOpts& opts) {
  LoadedModel loaded;
  if (!opts.model_path.empty()) {
    loaded.model = load_model(opts.model_path);
    return loaded;
  }
  QueueSpec spec = opts.queue_spec_path.empty()
                       ? default_queue_spec()
                       : queue_spec_from_json(opts.queue_spec_path);
  if (opts.smax_override > 0) spec.s_max = opts.smax_override;
  loaded.model = build_queueing_model(spec);
  loaded.certificate = queue_certificate(loaded.model);
  return loaded;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kParseError,
                "cannot open for writing: " + path.string());
  }
  out << text;
  if (text.empty() || text.back() != '\n') out << '\n';
}

void write_solution_csv(const fs::path& path, const GameModel& model,
                        const EquilibriumSolution& sol) {
  std::ostringstream os;
  os << "state,u_star,psi1,psi2,classification";
  for (int a = 0; a < model.num_actions_p1(); ++a) os << ",phi_" << a;
  for (int b = 0; b < model.num_actions_p2(); ++b) os << ",psi_" << b;
  os << '\n';
  for (int i = 0; i < model.num_states; ++i) {
    os << i << ',' << fmt12(round_sig(sol.u_star.values[i])) << ','
       << fmt12(round_sig(model.psi1[i])) << ','
       << fmt12(round_sig(model.psi2[i])) << ','
       << state_class_name(sol.classification[i]);
    for (double p : sol.phi_star[i]) os << ',' << fmt12(round_sig(p));
    for (double p : sol.psi_star[i]) os << ',' << fmt12(round_sig(p));
    os << '\n';
  }
  write_text(path, os.str());
}

void write_plot_csv(const fs::path& path, const GameModel& model,
                    const EquilibriumSolution& sol) {
  std::ostringstream os;
  os << "state,u_star,psi1,psi2\n";
  for (int i = 0; i < model.num_states; ++i) {
    os << i << ',' << fmt12(round_sig(sol.u_star.values[i])) << ','
       << fmt12(round_sig(model.psi1[i])) << ','
       << fmt12(round_sig(model.psi2[i])) << '\n';
  }
  write_text(path, os.str());
}

struct SolvedModel {
  GameModel model;
  LyapunovCertificate certificate;
  UniformizedModel uniformized;
  EquilibriumSolution solution;
};

SolvedModel solve_pipeline(const CommonOpts& opts) {
  LoadedModel loaded = acquire_model(opts);
  ValidationReport report =
      validate_model(loaded.model, loaded.certificate);
  if (!report.ok()) {
    throw Error(ErrorCode::kRejected, report.violations.front().message);
  }
  SolvedModel solved;
  solved.model = std::move(loaded.model);
  solved.certificate = *report.certificate;
  solved.uniformized = uniformize(solved.model, opts.theta);
  SolveOptions sopts;
  sopts.tol = opts.tol;
  sopts.max_iter = opts.max_iter;
  solved.solution =
      value_iterate(solved.uniformized, solved.certificate.W, sopts);
  return solved;
}

int cmd_validate(const CommonOpts& opts) {
  LoadedModel loaded = acquire_model(opts);
  ValidationReport report = validate_model(loaded.model, loaded.certificate);
  const std::string text = validation_report_to_json_text(report);
  if (opts.wants("json")) {
    fs::create_directories(opts.out_dir);
    write_text(fs::path(opts.out_dir) / "validate.json", text);
  }
  std::cout << text << '\n';
  return report.ok() ? 0 : 1;
}

int cmd_solve(const CommonOpts& opts) {
  SolvedModel solved = solve_pipeline(opts);
  fs::create_directories(opts.out_dir);
  if (opts.wants("json")) {
    write_text(fs::path(opts.out_dir) / "solution.json",
               solution_to_json_text(solved.solution));
  }
  if (opts.wants("csv")) {
    write_solution_csv(fs::path(opts.out_dir) / "solution.csv", solved.model,
                       solved.solution);
    write_plot_csv(fs::path(opts.out_dir) / "plot.csv", solved.model,
                   solved.solution);
  }
  std::cout << "converged in " << solved.solution.iterations
            << " sweeps, residual " << fmt12(solved.solution.residual)
            << ", |A1| = " << solved.solution.region_a1.size()
            << ", |A2| = " << solved.solution.region_a2.size() << '\n';
  return 0;
}

int cmd_verify(const CommonOpts& opts, const std::string& solution_path) {
  LoadedModel loaded = acquire_model(opts);
  ValidationReport vreport = validate_model(loaded.model, loaded.certificate);
  if (!vreport.ok()) {
    throw Error(ErrorCode::kRejected, vreport.violations.front().message);
  }
  const GameModel& model = loaded.model;
  UniformizedModel um = uniformize(model, opts.theta);

  EquilibriumSolution sol;
  bool external = !solution_path.empty();
  if (external) {
    sol = load_solution(solution_path, model, opts.tol);
  } else {
    SolveOptions sopts;
    sopts.tol = opts.tol;
    sopts.max_iter = opts.max_iter;
    sol = value_iterate(um, vreport.certificate->W, sopts);
  }

  DPIReport dpi = verify_dpi(um, model, sol, opts.dpi_tol);
  fs::create_directories(opts.out_dir);
  if (opts.wants("json")) {
    write_text(fs::path(opts.out_dir) / "dpi_report.json",
               dpi_report_to_json_text(dpi));
  }

  bool saddle_ok = true;
  // The saddle certificate needs strategies; an external u*-only file can
  // still be DPI-checked.
  if (!sol.phi_star.empty() && !sol.psi_star.empty()) {
    SaddleCheckReport saddle = check_saddle_point(
        model, sol, opts.deviations, opts.seed, opts.check_tol);
    saddle_ok = saddle.ok();
    if (opts.wants("json")) {
      write_text(fs::path(opts.out_dir) / "saddle_report.json",
                 saddle_report_to_json_text(saddle));
    }
    std::cout << "saddle: " << (saddle_ok ? "pass" : "FAIL")
              << " (max gain P2 " << fmt12(saddle.max_gain_p2) << ", P1 "
              << fmt12(saddle.max_gain_p1) << ", BR gaps "
              << fmt12(saddle.br_gap_p2) << "/" << fmt12(saddle.br_gap_p1)
              << ")\n";
  }
  std::cout << "dpi: " << (dpi.ok() ? "pass" : "FAIL") << " ("
            << dpi.violations.size() << " violation(s))\n";
  return dpi.ok() && saddle_ok ? 0 : 1;
}

int cmd_simulate(const CommonOpts& opts, bool dump_paths) {
  SolvedModel solved = solve_pipeline(opts);
  StrategyProfile profile =
      StrategyProfile::from_equilibrium(solved.model, solved.solution);
  SimulationConfig cfg;
  cfg.num_paths = opts.paths;
  cfg.master_seed = opts.seed;
  std::vector<PathRecord> paths =
      simulate_paths(solved.model, profile, cfg, opts.initial);
  PayoffEstimate estimate = estimate_payoff(paths, solved.model, profile);

  fs::create_directories(opts.out_dir);
  if (opts.wants("json")) {
    nlohmann::json doc = nlohmann::json::parse(
        payoff_estimate_to_json_text(estimate));
    const double mean = estimate.values[opts.initial];
    const double se = estimate.stderrs[opts.initial];
    doc["initial"] = opts.initial;
    doc["mean"] = round_sig(mean);
    doc["ci95"] = {round_sig(mean - 1.96 * se), round_sig(mean + 1.96 * se)};
    doc["u_star"] = round_sig(solved.solution.u_star.values[opts.initial]);
    write_text(fs::path(opts.out_dir) / "estimate.json", doc.dump(2));
  }
  if (dump_paths && opts.wants("csv")) {
    std::ofstream os(fs::path(opts.out_dir) / "paths.csv");
    write_paths_csv(os, paths);
  }
  std::cout << "estimate[" << opts.initial << "] = "
            << fmt12(estimate.values[opts.initial]) << " +/- "
            << fmt12(estimate.stderrs[opts.initial]) << " (u* = "
            << fmt12(solved.solution.u_star.values[opts.initial]) << ")\n";
  return 0;
}

int cmd_bench(const CommonOpts& opts, std::vector<int> grid) {
  if (grid.empty()) grid = {25, 50, 100, 200};
  std::ostringstream csv;
  csv << "smax,states,iterations,residual,wall_ms\n";
  nlohmann::json rows = nlohmann::json::array();
  for (int smax : grid) {
    CommonOpts row_opts = opts;
    row_opts.smax_override = smax;
    const auto start = std::chrono::steady_clock::now();
    SolvedModel solved = solve_pipeline(row_opts);
    const auto end = std::chrono::steady_clock::now();
    const double ms =
        std::chrono::duration<double, std::milli>(end - start).count();
    csv << smax << ',' << solved.model.num_states << ','
        << solved.solution.iterations << ','
        << fmt12(round_sig(solved.solution.residual)) << ','
        << fmt12(round_sig(ms, 4)) << '\n';
    rows.push_back({{"smax", smax},
                    {"states", solved.model.num_states},
                    {"iterations", solved.solution.iterations},
                    {"residual", round_sig(solved.solution.residual)},
                    {"wall_ms", round_sig(ms, 4)}});
    std::cout << "smax " << smax << ": " << solved.solution.iterations
              << " sweeps in " << fmt12(ms) << " ms\n";
  }
  fs::create_directories(opts.out_dir);
  if (opts.wants("csv")) {
    write_text(fs::path(opts.out_dir) / "bench.csv", csv.str());
  }
  if (opts.wants("json")) {
    write_text(fs::path(opts.out_dir) / "bench.json", rows.dump(2));
  }
  return 0;
}

int cmd_queue_demo(const CommonOpts& opts) {
  SolvedModel solved = solve_pipeline(opts);
  fs::create_directories(opts.out_dir);
  if (opts.wants("json")) {
    write_text(fs::path(opts.out_dir) / "solution.json",
               solution_to_json_text(solved.solution));
  }
  if (opts.wants("csv")) {
    write_solution_csv(fs::path(opts.out_dir) / "solution.csv", solved.model,
                       solved.solution);
    write_plot_csv(fs::path(opts.out_dir) / "plot.csv", solved.model,
                   solved.solution);
  }

  DPIReport dpi =
      verify_dpi(solved.uniformized, solved.model, solved.solution,
                 opts.dpi_tol);
  SaddleCheckReport saddle = check_saddle_point(
      solved.model, solved.solution, opts.deviations, opts.seed,
      opts.check_tol);
  if (opts.wants("json")) {
    write_text(fs::path(opts.out_dir) / "dpi_report.json",
               dpi_report_to_json_text(dpi));
    write_text(fs::path(opts.out_dir) / "saddle_report.json",
               saddle_report_to_json_text(saddle));
  }

  std::cout << "queue demo: " << solved.model.num_states << " states, "
            << solved.solution.iterations << " sweeps, residual "
            << fmt12(solved.solution.residual) << '\n'
            << "stop regions: |A1| = " << solved.solution.region_a1.size()
            << ", |A2| = " << solved.solution.region_a2.size() << '\n'
            << "dpi: " << (dpi.ok() ? "pass" : "FAIL") << ", saddle: "
            << (saddle.ok() ? "pass" : "FAIL") << '\n';
  return dpi.ok() && saddle.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"solver and verification toolkit for stochastic games with "
               "stopping and control on continuous-time Markov chains"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string solution_path;
  bool dump_paths = false;
  std::vector<int> grid;

  CLI::App* validate = app.add_subcommand("validate", "check model invariants");
  add_model_flags(validate, opts);
  add_output_flags(validate, opts);

  CLI::App* solve = app.add_subcommand("solve", "iterate to the game value");
  add_model_flags(solve, opts);
  add_solver_flags(solve, opts);
  add_output_flags(solve, opts);

  CLI::App* verify =
      app.add_subcommand("verify", "check the bilateral inequalities and the "
                                   "saddle certificate");
  add_model_flags(verify, opts);
  add_solver_flags(verify, opts);
  add_output_flags(verify, opts);
  verify->add_option("--solution", solution_path,
                     "verify this solution JSON instead of re-solving");
  verify->add_option("--dpi-tol", opts.dpi_tol, "DPI check tolerance");
  verify->add_option("--check-tol", opts.check_tol,
                     "saddle certificate tolerance");
  verify->add_option("--deviations", opts.deviations,
                     "random deviations per player");
  verify->add_option("--seed", opts.seed, "deviation sampling seed");

  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte-Carlo check of the value");
  add_model_flags(simulate, opts);
  add_solver_flags(simulate, opts);
  add_output_flags(simulate, opts);
  simulate->add_option("--paths", opts.paths, "number of paths");
  simulate->add_option("--seed", opts.seed, "master seed");
  simulate->add_option("--initial", opts.initial, "initial state");
  simulate->add_flag("--dump-paths", dump_paths, "write paths.csv");

  CLI::App* bench = app.add_subcommand("bench", "solve across an smax grid");
  add_model_flags(bench, opts);
  add_solver_flags(bench, opts);
  add_output_flags(bench, opts);
  bench->add_option("--smax-grid", grid, "truncation levels")->delimiter(',');

  CLI::App* demo =
      app.add_subcommand("queue-demo", "solve and verify the built-in queue");
  add_model_flags(demo, opts);
  add_solver_flags(demo, opts);
  add_output_flags(demo, opts);
  demo->add_option("--deviations", opts.deviations,
                   "random deviations per player");
  demo->add_option("--seed", opts.seed, "deviation sampling seed");
  demo->add_option("--dpi-tol", opts.dpi_tol, "DPI check tolerance");
  demo->add_option("--check-tol", opts.check_tol,
                   "saddle certificate tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(opts);
    if (solve->parsed()) return cmd_solve(opts);
    if (verify->parsed()) return cmd_verify(opts, solution_path);
    if (simulate->parsed()) return cmd_simulate(opts, dump_paths);
    if (bench->parsed()) return cmd_bench(opts, grid);
    if (demo->parsed()) return cmd_queue_demo(opts);
  } catch (const Error& e) {
    std::cout << error_to_json_text(error_code_name(e.code()), e.message())
              << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cout << error_to_json_text("INTERNAL", e.what()) << '\n';
    return 1;
  }
  return 0;
}
