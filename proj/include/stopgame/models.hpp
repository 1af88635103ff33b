#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stopgame/game_model.hpp"

namespace stopgame {

// Controlled single-server queue: player I buosts the service rate (action a
// adds h[a], at running cost c1), player II boosts the arrival rate (action b
// adds g[b], at running cost c2). Holding i customers earns player II
// c + r_lin * i. Quitting pays c_bar + R(i) (player I) or c_prime (II).
struct QueueSpec {
  std::vector<std::string> actions_p1 = {"idle", "boost"};
  std::vector<std::string> actions_p2 = {"hold", "push"};
  std::function<double(int)> lambda = [](int) { return 1.0; };
  std::function<double(int)> mu = [](int) { return 1.5; };
  std::vector<double> h = {0.0, 1.0};   // per action of player I
  std::vector<double> g = {0.0, 0.5};   // per action of player II
  double c = 0.05;
  double r_lin = 1.0;
  std::function<double(int, int)> c1 = [](int, int a) {
    return 0.2 * (a == 1 ? 1.0 : 0.0);
  };
  std::function<double(int, int)> c2 = [](int, int b) {
    return 0.1 * (b == 1 ? 0.5 : 0.0);
  };
  double c_bar = 8.0;
  std::function<double(int)> R = [](int i) { return 0.1 * i; };
  double c_prime = 0.5;
  double alpha = 1.0;
  int s_max = 50;
};

// The documented default parameter set.
QueueSpec default_queue_spec();

// Builds the truncated queue model. Throws kRejected if any net reward on
// the truncated range is negative or if c_prime fails to stay strictly below
// c_bar + R(i).
GameModel build_queueing_model(const QueueSpec& spec);

// Affine drift chain for birth-death models: w_1(i) = kappa*i plus a
// constant w_2 covering the worst upward drift, so W is affine in i.
LyapunovCertificate queue_certificate(const GameModel& model);

struct RandomModelOptions {
  int min_states = 2;
  int max_states = 8;
  int max_actions = 3;
  double rate_max = 5.0;
  double density = 0.5;  // probability an off-diagonal rate is present
  double alpha_min = 0.2;
  double alpha_max = 2.0;
  double reward_max = 5.0;
};

// Deterministic synthetic instance for the property suites. Obstacles are
// drawn around the reward scale so both clamps bind on a fair share of
// states.
GameModel random_model(const RandomModelOptions& opts, std::uint64_t seed);

// JSON model file round trip. load_model validates and throws kRejected on
// an invalid model, kParseError on a malformed document (naming the field).
GameModel load_model(const std::string& path);
void save_model(const GameModel& model, const std::string& path);

GameModel model_from_json_text(const std::string& text);
std::string model_to_json_text(const GameModel& model);

}  // namespace stopgame
