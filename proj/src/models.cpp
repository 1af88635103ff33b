#include "stopgame/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stopgame/errors.hpp"
#include "stopgame/rng.hpp"

namespace stopgame {

using nlohmann::json;

QueueSpec default_queue_spec() { return QueueSpec{}; }

GameModel build_queueing_model(const QueueSpec& spec) {
  if (spec.h.size() != spec.actions_p1.size() ||
      spec.g.size() != spec.actions_p2.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "h/g tables must match the action label lists");
  }
  CountableModelSpec countable;
  countable.actions_p1 = spec.actions_p1;
  countable.actions_p2 = spec.actions_p2;
  countable.alpha = spec.alpha;
  countable.off_diagonal_rates =
      [&spec](int i, int a, int b) {
        std::vector<std::pair<int, double>> row;
        row.emplace_back(i + 1, spec.lambda(i) + spec.g[b]);
        if (i > 0) row.emplace_back(i - 1, spec.mu(i) + spec.h[a]);
        return row;
      };
  countable.reward = [&spec](int i, int a, int b) {
    return spec.c + spec.r_lin * i + spec.c1(i, a) - spec.c2(i, b);
  };
  countable.psi1 = [&spec](int i) { return spec.c_bar + spec.R(i); };
  countable.psi2 = [&spec](int) { return spec.c_prime; };

  GameModel model = truncate_model(countable, spec.s_max);

  for (int i = 0; i <= spec.s_max; ++i) {
    if (!(model.psi2[i] < model.psi1[i])) {
      std::ostringstream os;
      os << "c_prime = " << model.psi2[i]
         << " is not strictly below c_bar + R(" << i
         << ") = " << model.psi1[i];
      throw Error(ErrorCode::kRejected, os.str());
    }
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const double r = model.reward_rate(i, a, b);
        if (r < 0.0) {
          std::ostringstream os;
          os << "net reward rate " << r << " at (i=" << i << ", a=" << a
             << ", b=" << b << ") is negative";
          throw Error(ErrorCode::kRejected, os.str());
        }
      }
    }
  }
  return model;
}

LyapunovCertificate queue_certificate(const GameModel& model) {
  const int n = model.num_states;
  std::vector<double> w1(n);
  for (int i = 0; i < n; ++i) w1[i] = static_cast<double>(i);

  // Constant second layer: at least the worst upward drift of w1.
  double worst_drift = 1.0;
  for (int i = 0; i < n; ++i) {
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const SparseRow& row = model.rate_row(i, a, b);
        double drift = 0.0;
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          drift += row.vals[k] * w1[row.cols[k]];
        }
        worst_drift = std::max(worst_drift, drift);
      }
    }
  }
  std::vector<double> w2(n, worst_drift);
  return complete_certificate(model, {std::move(w1), std::move(w2)});
}

GameModel random_model(const RandomModelOptions& opts, std::uint64_t seed) {
  CounterRng rng(seed, 0);
  auto uniform_int = [&rng](int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng.next_double() * (hi - lo + 1));
  };
  auto uniform = [&rng](double lo, double hi) {
    return lo + rng.next_double() * (hi - lo);
  };

  GameModel model;
  model.num_states = uniform_int(opts.min_states, opts.max_states);
  const int na = uniform_int(1, opts.max_actions);
  const int nb = uniform_int(1, opts.max_actions);
  for (int a = 0; a < na; ++a) model.actions_p1.push_back("a" + std::to_string(a));
  for (int b = 0; b < nb; ++b) model.actions_p2.push_back("b" + std::to_string(b));
  model.alpha = uniform(opts.alpha_min, opts.alpha_max);

  const std::size_t rows =
      static_cast<std::size_t>(model.num_states) * na * nb;
  model.rates.resize(rows);
  model.reward.resize(rows);
  for (int i = 0; i < model.num_states; ++i) {
    for (int a = 0; a < na; ++a) {
      for (int b = 0; b < nb; ++b) {
        SparseRow row;
        double outflow = 0.0;
        for (int j = 0; j < model.num_states; ++j) {
          if (j == i) continue;
          if (rng.next_double() < opts.density) {
            const double rate = uniform(0.0, opts.rate_max);
            if (rate > 0.0) {
              row.cols.push_back(j);
              row.vals.push_back(rate);
              outflow += rate;
            }
          }
        }
        row.cols.push_back(i);
        row.vals.push_back(-outflow);
        model.rates[model.row_index(i, a, b)] = std::move(row);
        model.reward[model.row_index(i, a, b)] = uniform(0.0, opts.reward_max);
      }
    }
  }

  // Obstacles around the scale of achievable values, so clamps bind on some
  // states but not all.
  const double scale = opts.reward_max / model.alpha;
  model.psi1.resize(model.num_states);
  model.psi2.resize(model.num_states);
  for (int i = 0; i < model.num_states; ++i) {
    model.psi2[i] = uniform(0.0, 0.8 * scale);
    model.psi1[i] = model.psi2[i] + uniform(0.05 * scale, 1.2 * scale);
  }
  return model;
}

namespace {

const json& require_field(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) {
    throw Error(ErrorCode::kParseError,
                std::string("missing field '") + name + "'");
  }
  return *it;
}

int as_state(const json& v, const char* context) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorCode::kParseError,
                std::string("expected a nonnegative integer in ") + context);
  }
  return v.get<int>();
}

}  // namespace

namespace {

GameModel model_from_parsed(const json& doc);

}  // namespace

GameModel model_from_json_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParseError, e.what());
  }
  try {
    return model_from_parsed(doc);
  } catch (const json::exception& e) {
    // wrong value types surface here with nlohmann's field context
    throw Error(ErrorCode::kParseError, e.what());
  }
}

namespace {

GameModel model_from_parsed(const json& doc) {
  GameModel model;
  model.alpha = require_field(doc, "alpha").get<double>();
  model.num_states = as_state(require_field(doc, "states"), "states");
  model.actions_p1 =
      require_field(doc, "actions_p1").get<std::vector<std::string>>();
  model.actions_p2 =
      require_field(doc, "actions_p2").get<std::vector<std::string>>();
  model.psi1 = require_field(doc, "psi1").get<std::vector<double>>();
  model.psi2 = require_field(doc, "psi2").get<std::vector<double>>();
  if (model.psi1.size() != static_cast<std::size_t>(model.num_states) ||
      model.psi2.size() != static_cast<std::size_t>(model.num_states)) {
    throw Error(ErrorCode::kParseError,
                "psi1/psi2 length does not match 'states'");
  }

  const int na = model.num_actions_p1();
  const int nb = model.num_actions_p2();
  if (na == 0 || nb == 0) {
    throw Error(ErrorCode::kParseError, "empty action list");
  }
  const std::size_t rows =
      static_cast<std::size_t>(model.num_states) * na * nb;
  model.rates.resize(rows);
  model.reward.assign(rows, 0.0);

  const json& rate_entries = require_field(doc, "rates");
  if (!rate_entries.is_array()) {
    throw Error(ErrorCode::kParseError, "'rates' must be an array");
  }
  std::vector<char> has_diagonal(rows, 0);
  for (const json& entry : rate_entries) {
    if (!entry.is_array() || entry.size() != 5) {
      throw Error(ErrorCode::kParseError,
                  "rates entries must be [i, a, b, j, value]");
    }
    const int i = as_state(entry[0], "rates[i]");
    const int a = as_state(entry[1], "rates[a]");
    const int b = as_state(entry[2], "rates[b]");
    const int j = as_state(entry[3], "rates[j]");
    const double value = entry[4].get<double>();
    if (i >= model.num_states || j >= model.num_states || a >= na || b >= nb) {
      throw Error(ErrorCode::kParseError, "rates entry out of range");
    }
    SparseRow& row = model.rates[model.row_index(i, a, b)];
    row.cols.push_back(j);
    row.vals.push_back(value);
    if (i == j) has_diagonal[model.row_index(i, a, b)] = 1;
  }
  // Missing diagonals are reconstructed from conservativeness.
  for (std::size_t r = 0; r < rows; ++r) {
    if (has_diagonal[r]) continue;
    const int i = static_cast<int>(r / (static_cast<std::size_t>(na) * nb));
    double outflow = 0.0;
    for (double v : model.rates[r].vals) outflow += v;
    model.rates[r].cols.push_back(i);
    model.rates[r].vals.push_back(-outflow);
  }

  const json& reward_entries = require_field(doc, "rewards");
  if (!reward_entries.is_array()) {
    throw Error(ErrorCode::kParseError, "'rewards' must be an array");
  }
  for (const json& entry : reward_entries) {
    if (!entry.is_array() || entry.size() != 4) {
      throw Error(ErrorCode::kParseError,
                  "rewards entries must be [i, a, b, value]");
    }
    const int i = as_state(entry[0], "rewards[i]");
    const int a = as_state(entry[1], "rewards[a]");
    const int b = as_state(entry[2], "rewards[b]");
    if (i >= model.num_states || a >= na || b >= nb) {
      throw Error(ErrorCode::kParseError, "rewards entry out of range");
    }
    model.reward[model.row_index(i, a, b)] = entry[3].get<double>();
  }

  ValidationReport report = validate_model(model);
  if (!report.ok()) {
    throw Error(ErrorCode::kRejected, report.violations.front().message);
  }
  return model;
}

}  // namespace

std::string model_to_json_text(const GameModel& model) {
  json doc;
  doc["alpha"] = model.alpha;
  doc["states"] = model.num_states;
  doc["actions_p1"] = model.actions_p1;
  doc["actions_p2"] = model.actions_p2;
  json rates = json::array();
  json rewards = json::array();
  for (int i = 0; i < model.num_states; ++i) {
    for (int a = 0; a < model.num_actions_p1(); ++a) {
      for (int b = 0; b < model.num_actions_p2(); ++b) {
        const SparseRow& row = model.rate_row(i, a, b);
        for (std::size_t k = 0; k < row.cols.size(); ++k) {
          // Diagonals are kept so the round trip is bit-exact even when the
          // stored diagonal differs from -sum by entry roundoff.
          if (row.vals[k] == 0.0 && row.cols[k] != i) continue;
          rates.push_back(json::array(
              {i, a, b, row.cols[k], row.vals[k]}));
        }
        const double r = model.reward_rate(i, a, b);
        if (r != 0.0) rewards.push_back(json::array({i, a, b, r}));
      }
    }
  }
  doc["rates"] = std::move(rates);
  doc["rewards"] = std::move(rewards);
  doc["psi1"] = model.psi1;
  doc["psi2"] = model.psi2;
  return doc.dump(2);
}

GameModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::kParseError, "cannot open model file: " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return model_from_json_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

void save_model(const GameModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::kParseError, "cannot open for writing: " + path);
  }
  out << model_to_json_text(model) << '\n';
}

}  // namespace stopgame
