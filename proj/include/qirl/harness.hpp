// Experiment runner: trains one agent per seed, logs every episode, extracts the
// greedy trajectory and scores it against the DP oracle.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qirl/agents.hpp"
#include "qirl/gridworld.hpp"
#include "qirl/oracle.hpp"

namespace qirl {

enum class AgentKind { QiRL, QLearningEpsilon, QLearningBoltzmann };

std::string_view to_string(AgentKind kind);
// Accepts "qirl", "ql_eps" and "ql_boltz". Throws std::invalid_argument otherwise.
AgentKind parse_agent_kind(std::string_view name);

struct RunConfig {
  std::filesystem::path env_file;
  EnvConfig env;  // loaded from env_file
  AgentKind agent = AgentKind::QiRL;
  int episodes = 1000;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  int threads = 0;  // 0 = hardware concurrency

  QiRLConfig qirl;
  bool reward_scale_is_bonus = true;  // reward_scale := terminal bonus at run time

  LearningRate ql_alpha{0.1, 0.0};
  double ql_gamma = 1.0;
  ExplorationSchedule epsilon{ExplorationSchedule::Kind::EpsilonGreedy, 1.0, 0.995, 0.01};
  // Temperatures in units of the terminal bonus.
  ExplorationSchedule boltzmann{ExplorationSchedule::Kind::Boltzmann, 1.0, 0.995, 0.01};
};

class RunConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Run config YAML. env_file is resolved relative to the config's directory.
// A plain environment file is also accepted and yields default agent settings.
RunConfig load_run_config(const std::filesystem::path& path);
void validate(const RunConfig& cfg);

// Stable 64-bit FNV-1a digest of the resolved configuration, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const GridWorld& env);

struct EpisodeLog {
  std::uint64_t seed = 0;
  int episode = 0;  // 1-based
  double episode_return = 0.0;
  int steps = 0;
  bool reached_terminal = false;

  friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

// Called after every learning update with the transition and the agent.
using StepObserver = std::function<void(const Transition&, const Agent&)>;

// One training episode from the start cell: select, step, learn until the
// terminal cell or the step budget. `episode` is 0-based. Records the actions
// taken when `actions` is non-null.
EpisodeLog run_episode(const GridWorld& env, Agent& agent, SplitMix64& rng, int episode,
                       const StepObserver& observer = {}, std::vector<Action>* actions = nullptr);

// Sum of rewards obtained by replaying actions from the start cell.
double replay_return(const GridWorld& env, std::span<const Action> actions);

inline constexpr int kMovingAverageWindow = 50;

struct ConvergenceMetric {
  std::optional<int> episodes_to_90pct;        // 1-based episode count
  std::optional<double> final_return_mean;     // moving average at the last episode
  std::optional<double> oracle_gap;            // (oracle - greedy) / oracle
  bool defined() const { return episodes_to_90pct.has_value(); }
};

// episodes_to_90pct is the first episode whose trailing W-episode mean reaches
// 0.9 x the final trailing mean. Undefined with fewer than W episodes. The gap is
// undefined if the oracle is infeasible or its return is zero.
ConvergenceMetric convergence_metrics(std::span<const double> returns, const DPResult& oracle,
                                      double greedy_return, int window = kMovingAverageWindow);
ConvergenceMetric convergence_metrics(std::span<const EpisodeLog> logs, const DPResult& oracle,
                                      double greedy_return, int window = kMovingAverageWindow);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeLog> episodes;
  Rollout greedy;
  ConvergenceMetric metric;
  bool within_oracle_bound = true;
};

struct RunResult {
  std::string agent;
  std::string config_hash;
  DPResult oracle;
  std::vector<SeedResult> seeds;  // ordered as in RunConfig::seeds

  std::optional<double> median_episodes_to_90pct() const;
};

// Trains a fresh agent for one seed. Throws std::logic_error if a spot-checked
// episode return disagrees with a replay through the environment.
SeedResult train_seed(const RunConfig& cfg, const GridWorld& env, const DPResult& oracle,
                      std::uint64_t seed, const StepObserver& observer = {});

// Trains every seed (in parallel) and joins the results in seed order.
RunResult run(const RunConfig& cfg);

// Writes episodes.csv, trajectory.csv and summary.json into dir.
void write_outputs(const RunResult& result, const GridWorld& env,
                   const std::filesystem::path& dir);

struct TrajectoryRow {
  std::uint64_t seed = 0;
  int step = 0;
  int cell_i = 0;
  int cell_j = 0;
  double x_m = 0.0;
  double y_m = 0.0;
  double reward = 0.0;

  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

std::vector<TrajectoryRow> trajectory_rows(std::uint64_t seed, const Rollout& rollout,
                                           const GridWorld& env);

void write_episodes_csv(std::ostream& out, std::span<const EpisodeLog> logs);
std::vector<EpisodeLog> read_episodes_csv(std::istream& in);
void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows);
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in);

struct StoredSeedMetrics {
  std::uint64_t seed = 0;
  ConvergenceMetric metric;
  double greedy_return = 0.0;
  int episodes = 0;
};

// Recomputes per-seed metrics from the files written by write_outputs.
std::vector<StoredSeedMetrics> metrics_from_outputs(const std::filesystem::path& dir);

// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace qirl
