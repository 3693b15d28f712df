// Tabular learners: the quantum-inspired agent (collapse selection over a
// per-state action probability memory, multiplicative reinforcement, TD(0)
// state values) and two Q-learning baselines (epsilon-greedy, Boltzmann).
#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "qirl/gridworld.hpp"
#include "qirl/quantum.hpp"
#include "qirl/rng.hpp"

namespace qirl {

// alpha_k = initial / (1 + decay * k) for episode k (0-based). decay = 0 is constant.
struct LearningRate {
  double initial = 0.1;
  double decay = 0.0;

  double at(int episode) const;
};

struct QiRLConfig {
  LearningRate alpha{0.1, 0.0};
  double gamma = 1.0;
  double k_plus = 1.0;
  double k_minus = -1.0;
  // Divides the reinforcement exponent. The harness sets it to the terminal bonus.
  double reward_scale = 1.0;
  double exponent_clamp = 10.0;
  double p_floor = 1e-4;
};

// Throws std::invalid_argument on a constraint violation.
void validate(const QiRLConfig& cfg);
void validate(const LearningRate& lr);

struct ExplorationSchedule {
  enum class Kind { EpsilonGreedy, Boltzmann };

  Kind kind = Kind::EpsilonGreedy;
  double initial = 1.0;
  double decay = 0.995;  // multiplicative, per episode
  double floor = 0.01;

  // max(floor, initial * decay^episode)
  double at(int episode) const;
};

void validate(const ExplorationSchedule& schedule);

// Temperatures below this are refused by Boltzmann selection.
inline constexpr double kMinTemperature = 1e-12;

// One environment transition as seen by a learner.
struct Transition {
  StateId state;
  Action action = Action::Forward;
  double reward = 0.0;
  StateId next_state;
  bool boundary_hit = false;
  bool terminal = false;
  bool truncated = false;  // the step budget ran out on this transition

  // Nothing is collected after the terminal cell or the last budgeted step.
  bool ends_episode() const { return terminal || truncated; }
};

class ValueTable {
 public:
  explicit ValueTable(std::size_t num_states) : v_(num_states, 0.0) {}

  double operator[](StateId s) const { return v_.at(s.index()); }
  double& operator[](StateId s) { return v_.at(s.index()); }
  std::size_t size() const { return v_.size(); }

 private:
  std::vector<double> v_;
};

// Per-state probability vector over actions ("AmpMem"), initialized uniform.
class ActionPreferenceTable {
 public:
  explicit ActionPreferenceTable(std::size_t num_states)
      : rows_(num_states, Probabilities{0.25, 0.25, 0.25, 0.25}) {}

  const Probabilities& row(StateId s) const { return rows_.at(s.index()); }
  Probabilities& row(StateId s) { return rows_.at(s.index()); }
  std::size_t size() const { return rows_.size(); }

 private:
  std::vector<Probabilities> rows_;
};

class QTable {
 public:
  using Row = std::array<double, kNumActions>;

  explicit QTable(std::size_t num_states) : q_(num_states, Row{}) {}

  const Row& row(StateId s) const { return q_.at(s.index()); }
  Row& row(StateId s) { return q_.at(s.index()); }
  double operator()(StateId s, Action a) const { return row(s)[index_of(a)]; }
  double& operator()(StateId s, Action a) { return row(s)[index_of(a)]; }
  std::size_t size() const { return q_.size(); }

 private:
  std::vector<Row> q_;
};

// Samples an action with the probability stored for it. Throws std::domain_error
// if the row is not a probability vector.
Action qirl_select(const ActionPreferenceTable& prefs, StateId s, SplitMix64& rng);

struct QiRLUpdate {
  double td_error = 0.0;  // computed before the value write
  double gain = 0.0;      // k_plus or k_minus
  double exponent = 0.0;  // after clamping
};

// TD(0) value update followed by the multiplicative reinforcement of the chosen
// action, renormalization and the probability floor. Episode-ending
// transitions bootstrap from 0. Throws std::domain_error on a non-finite reward.
QiRLUpdate qirl_update(ValueTable& v, ActionPreferenceTable& prefs, const Transition& t,
                       const QiRLConfig& cfg, int episode = 0);

// Rescales row to sum 1 with every entry at least p_floor. Entries pushed below
// the floor are pinned to it and the rest share the remaining mass in proportion.
void renormalize_with_floor(Probabilities& row, double p_floor);

// Throws std::domain_error if a Boltzmann temperature drops below kMinTemperature.
Action ql_select(const QTable& q, StateId s, const ExplorationSchedule& schedule, int episode,
                 SplitMix64& rng);

void ql_update(QTable& q, const Transition& t, double alpha, double gamma);

// Deterministic rollout of a learned policy from the start cell.
struct Rollout {
  std::vector<StateId> states;  // includes the start cell
  std::vector<double> rewards;  // rewards[k] was earned entering states[k + 1]
  double total_return = 0.0;
  int steps = 0;
  bool reached_terminal = false;
  bool tie_broken = false;  // some argmax was tied and resolved by action order
  bool revisited = false;   // a state repeated, so the policy cycles and cannot terminate

  double mean_reward() const { return steps > 0 ? total_return / steps : 0.0; }
};

using GreedyChoice = std::function<Action(StateId, bool& tied)>;

// Follows choose() until the terminal cell or the step budget.
Rollout greedy_rollout(const GridWorld& env, const GreedyChoice& choose);
Rollout greedy_policy(const ActionPreferenceTable& prefs, const GridWorld& env);
Rollout greedy_policy(const QTable& q, const GridWorld& env);

// First index holding the maximum; tied reports whether another index matches it.
std::size_t argmax_first(std::span<const double, kNumActions> values, bool& tied);

// Common learner interface used by the experiment harness.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual std::string_view name() const = 0;
  virtual Action select(StateId s, int episode, SplitMix64& rng) = 0;
  virtual void learn(const Transition& t, int episode) = 0;
  virtual Rollout greedy(const GridWorld& env) const = 0;
};

class QiRLAgent final : public Agent {
 public:
  QiRLAgent(std::size_t num_states, QiRLConfig cfg);

  std::string_view name() const override { return "qirl"; }
  Action select(StateId s, int episode, SplitMix64& rng) override;
  void learn(const Transition& t, int episode) override;
  Rollout greedy(const GridWorld& env) const override;

  const ValueTable& values() const { return values_; }
  const ActionPreferenceTable& preferences() const { return prefs_; }
  const QiRLConfig& config() const { return cfg_; }

 private:
  QiRLConfig cfg_;
  ValueTable values_;
  ActionPreferenceTable prefs_;
};

class QLearningAgent final : public Agent {
 public:
  QLearningAgent(std::size_t num_states, ExplorationSchedule schedule, LearningRate alpha,
                 double gamma = 1.0);

  std::string_view name() const override;
  Action select(StateId s, int episode, SplitMix64& rng) override;
  void learn(const Transition& t, int episode) override;
  Rollout greedy(const GridWorld& env) const override;

  const QTable& table() const { return q_; }
  const ExplorationSchedule& schedule() const { return schedule_; }

 private:
  ExplorationSchedule schedule_;
  LearningRate alpha_;
  double gamma_;
  QTable q_;
};

}  // namespace qirl
