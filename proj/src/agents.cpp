#include "qirl/agents.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qirl {

double LearningRate::at(int episode) const {
  return initial / (1.0 + decay * static_cast<double>(episode));
}

void validate(const LearningRate& lr) {
  if (!(lr.initial >= 0.0 && lr.initial <= 1.0)) {
    throw std::invalid_argument("learning rate must lie in [0, 1]");
  }
  if (!(lr.decay >= 0.0) || !std::isfinite(lr.decay)) {
    throw std::invalid_argument("learning rate decay must be non-negative");
  }
}

void validate(const QiRLConfig& cfg) {
  validate(cfg.alpha);
  if (cfg.gamma != 1.0) throw std::invalid_argument("episodic task: gamma must be 1");
  if (!(cfg.k_plus > 0.0)) throw std::invalid_argument("k_plus must be positive");
  if (!(cfg.k_minus < 0.0)) throw std::invalid_argument("k_minus must be negative");
  if (!(cfg.reward_scale > 0.0) || !std::isfinite(cfg.reward_scale)) {
    throw std::invalid_argument("reward_scale must be positive");
  }
  if (!(cfg.exponent_clamp > 0.0)) throw std::invalid_argument("exponent_clamp must be positive");
  if (!(cfg.p_floor >= 0.0 && cfg.p_floor <= 0.01)) {
    throw std::invalid_argument("p_floor must lie in [0, 0.01]");
  }
}

double ExplorationSchedule::at(int episode) const {
  return std::max(floor, initial * std::pow(decay, static_cast<double>(episode)));
}

void validate(const ExplorationSchedule& s) {
  if (!(s.initial > 0.0)) throw std::invalid_argument("exploration initial value must be positive");
  if (!(s.decay > 0.0 && s.decay <= 1.0)) {
    throw std::invalid_argument("exploration decay must lie in (0, 1]");
  }
  if (s.kind == ExplorationSchedule::Kind::Boltzmann) {
    if (!(s.floor > 0.0)) throw std::invalid_argument("temperature floor must be positive");
  } else {
    if (!(s.floor >= 0.0)) throw std::invalid_argument("epsilon floor must be non-negative");
    if (s.initial > 1.0 || s.floor > 1.0) throw std::invalid_argument("epsilon must not exceed 1");
  }
}

Action qirl_select(const ActionPreferenceTable& prefs, StateId s, SplitMix64& rng) {
  return kAllActions[sample_index(prefs.row(s), rng)];
}

void renormalize_with_floor(Probabilities& row, double p_floor) {
  const double total = std::accumulate(row.begin(), row.end(), 0.0);
  for (auto& p : row) p /= total;
  if (p_floor <= 0.0) return;

  std::array<bool, kRegisterSize> pinned{};
  for (;;) {
    double free_mass = 1.0;
    double free_total = 0.0;
    for (std::size_t n = 0; n < kRegisterSize; ++n) {
      if (pinned[n]) {
        free_mass -= p_floor;
      } else {
        free_total += row[n];
      }
    }
    bool changed = false;
    for (std::size_t n = 0; n < kRegisterSize; ++n) {
      if (pinned[n]) continue;
      if (row[n] * free_mass / free_total < p_floor) {
        pinned[n] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t n = 0; n < kRegisterSize; ++n) {
        row[n] = pinned[n] ? p_floor : row[n] * free_mass / free_total;
      }
      return;
    }
  }
}

QiRLUpdate qirl_update(ValueTable& v, ActionPreferenceTable& prefs, const Transition& t,
                       const QiRLConfig& cfg, int episode) {
  if (!std::isfinite(t.reward)) throw std::domain_error("reward must be finite");
  const double next_value = t.ends_episode() ? 0.0 : v[t.next_state];
  const double alpha = cfg.alpha.at(episode);

  QiRLUpdate out;
  out.td_error = t.reward + cfg.gamma * next_value - v[t.state];
  v[t.state] += alpha * out.td_error;

  out.gain = (t.boundary_hit || out.td_error < 0.0) ? cfg.k_minus : cfg.k_plus;
  out.exponent = std::clamp(out.gain * (t.reward + next_value) / cfg.reward_scale,
                            -cfg.exponent_clamp, cfg.exponent_clamp);

  Probabilities& row = prefs.row(t.state);
  row[index_of(t.action)] *= std::exp(out.exponent);
  renormalize_with_floor(row, cfg.p_floor);
  return out;
}

std::size_t argmax_first(std::span<const double, kNumActions> values, bool& tied) {
  const auto best = std::max_element(values.begin(), values.end());
  tied = std::count(values.begin(), values.end(), *best) > 1;
  return static_cast<std::size_t>(best - values.begin());
}

Action ql_select(const QTable& q, StateId s, const ExplorationSchedule& schedule, int episode,
                 SplitMix64& rng) {
  const QTable::Row& row = q.row(s);
  const double param = schedule.at(episode);

  if (schedule.kind == ExplorationSchedule::Kind::EpsilonGreedy) {
    if (rng.uniform() < param) return kAllActions[rng.below(kNumActions)];
    const double best = *std::max_element(row.begin(), row.end());
    std::array<std::size_t, kNumActions> ties{};
    std::size_t count = 0;
    for (std::size_t n = 0; n < kNumActions; ++n) {
      if (row[n] == best) ties[count++] = n;
    }
    return kAllActions[count == 1 ? ties[0] : ties[rng.below(count)]];
  }

  if (!(param >= kMinTemperature)) {
    throw std::domain_error("Boltzmann temperature " + std::to_string(param) + " is too small");
  }
  const double best = *std::max_element(row.begin(), row.end());
  Probabilities weights;
  double total = 0.0;
  for (std::size_t n = 0; n < kNumActions; ++n) {
    weights[n] = std::exp((row[n] - best) / param);
    total += weights[n];
  }
  for (auto& w : weights) w /= total;
  return kAllActions[sample_index(weights, rng)];
}

void ql_update(QTable& q, const Transition& t, double alpha, double gamma) {
  double bootstrap = 0.0;
  if (!t.ends_episode()) {
    const QTable::Row& next = q.row(t.next_state);
    bootstrap = *std::max_element(next.begin(), next.end());
  }
  double& entry = q(t.state, t.action);
  entry += alpha * (t.reward + gamma * bootstrap - entry);
}

Rollout greedy_rollout(const GridWorld& env, const GreedyChoice& choose) {
  Rollout out;
  StateId s = env.start();
  out.states.push_back(s);
  std::vector<bool> seen(env.num_states(), false);
  seen[s.index()] = true;
  while (out.steps < env.max_steps()) {
    bool tied = false;
    const Action a = choose(s, tied);
    out.tie_broken = out.tie_broken || tied;
    const StepOutcome o = env.step(s, a);
    ++out.steps;
    out.rewards.push_back(o.reward);
    out.total_return += o.reward;
    out.states.push_back(o.next_state);
    s = o.next_state;
    if (o.terminal) {
      out.reached_terminal = true;
      break;
    }
    if (seen[s.index()]) out.revisited = true;
    seen[s.index()] = true;
  }
  return out;
}

Rollout greedy_policy(const ActionPreferenceTable& prefs, const GridWorld& env) {
  return greedy_rollout(env, [&prefs](StateId s, bool& tied) {
    return kAllActions[argmax_first(prefs.row(s), tied)];
  });
}

Rollout greedy_policy(const QTable& q, const GridWorld& env) {
  return greedy_rollout(env, [&q](StateId s, bool& tied) {
    return kAllActions[argmax_first(q.row(s), tied)];
  });
}

QiRLAgent::QiRLAgent(std::size_t num_states, QiRLConfig cfg)
    : cfg_(cfg), values_(num_states), prefs_(num_states) {
  validate(cfg_);
}

Action QiRLAgent::select(StateId s, int /*episode*/, SplitMix64& rng) {
  return qirl_select(prefs_, s, rng);
}

void QiRLAgent::learn(const Transition& t, int episode) {
  qirl_update(values_, prefs_, t, cfg_, episode);
}

Rollout QiRLAgent::greedy(const GridWorld& env) const { return greedy_policy(prefs_, env); }

QLearningAgent::QLearningAgent(std::size_t num_states, ExplorationSchedule schedule,
                               LearningRate alpha, double gamma)
    : schedule_(schedule), alpha_(alpha), gamma_(gamma), q_(num_states) {
  validate(schedule_);
  validate(alpha_);
  if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
}

std::string_view QLearningAgent::name() const {
  return schedule_.kind == ExplorationSchedule::Kind::Boltzmann ? "ql_boltz" : "ql_eps";
}

Action QLearningAgent::select(StateId s, int episode, SplitMix64& rng) {
  return ql_select(q_, s, schedule_, episode, rng);
}

void QLearningAgent::learn(const Transition& t, int episode) {
  ql_update(q_, t, alpha_.at(episode), gamma_);
}

Rollout QLearningAgent::greedy(const GridWorld& env) const { return greedy_policy(q_, env); }

}  // namespace qirl
