// Deterministic episodic grid MDP over the UAV's feasible area.
//
// Cells are addressed as (i, j) with i along x and j along y. A state id is the
// flattened index j * n1 + i. Rewards are granted on entering a cell and come
// from a table precomputed at build time, either from the channel model at each
// cell center or from an explicit override (used for small synthetic grids).
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qirl/channel.hpp"

namespace qirl {

enum class Action : std::uint8_t { Forward = 0, Backward = 1, Left = 2, Right = 3 };

inline constexpr std::size_t kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Forward, Action::Backward, Action::Left, Action::Right};

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }
std::string_view to_string(Action a);

struct Cell {
  int i = 0;
  int j = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

// Forward = +y, Backward = -y, Left = -x, Right = +x.
Cell displace(Cell c, Action a);

int manhattan(Cell a, Cell b);

struct StateId {
  std::uint32_t value = 0;

  constexpr std::size_t index() const { return value; }
  friend constexpr bool operator==(StateId, StateId) = default;
  friend constexpr auto operator<=>(StateId, StateId) = default;
};

struct GridSpec {
  int n1 = 10;  // cells along x
  int n2 = 10;  // cells along y
  double cell_size_m = 20.0;
  Position3 origin{10.0, 10.0, 100.0};  // center of cell (0, 0); z is ignored
  double altitude_m = 100.0;
};

struct EnvConfig {
  GridSpec grid;
  std::vector<GroundUser> users;
  CarrierConfig carrier;
  Cell start_cell{0, 9};
  Cell terminal_cell{9, 0};
  int max_steps = 900;
  double total_bandwidth_hz = 10e6;
  // Reward for a move that would leave the grid. Zero unless a penalty is wanted.
  double boundary_reward = 0.0;
  // Replaces the channel-derived cell rewards when set; size n1 * n2, indexed by StateId.
  std::optional<std::vector<double>> reward_override;
};

// Raised when an EnvConfig violates one of its constraints. The message names it.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void validate(const EnvConfig& config);

// Uniform-reward environment on an n1 x n2 grid, used by tests and examples.
EnvConfig synthetic_config(int n1, int n2, Cell start, Cell terminal, int max_steps,
                           double cell_reward = 1.0);

struct StepOutcome {
  StateId next_state;
  double reward = 0.0;
  bool boundary_hit = false;
  bool terminal = false;

  friend bool operator==(const StepOutcome&, const StepOutcome&) = default;
};

class GridWorld {
 public:
  // Validates the config and precomputes the reward table and terminal bonus.
  explicit GridWorld(EnvConfig config);

  const EnvConfig& config() const { return config_; }
  int n1() const { return config_.grid.n1; }
  int n2() const { return config_.grid.n2; }
  std::size_t num_states() const { return rewards_.size(); }
  int max_steps() const { return config_.max_steps; }

  StateId start() const { return start_; }
  StateId terminal() const { return terminal_; }
  bool is_terminal(StateId s) const { return s == terminal_; }

  bool contains(Cell c) const;
  StateId state_of(Cell c) const;
  Cell cell_of(StateId s) const;
  Position3 cell_center(StateId s) const;

  double cell_reward(StateId s) const;
  std::span<const double> reward_table() const { return rewards_; }
  double terminal_bonus() const { return terminal_bonus_; }

  // Throws std::logic_error when called on the terminal state.
  StepOutcome step(StateId s, Action a) const;

 private:
  void check(StateId s) const;

  EnvConfig config_;
  std::vector<double> rewards_;
  double terminal_bonus_ = 0.0;
  StateId start_;
  StateId terminal_;
};

}  // namespace qirl
