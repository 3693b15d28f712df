#include "qirl/gridworld.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

namespace qirl {

namespace {

constexpr double kTerminalBonusFactor = 10.0;

std::string describe(Cell c) {
  return "(" + std::to_string(c.i) + ", " + std::to_string(c.j) + ")";
}

bool inside(const GridSpec& g, Cell c) {
  return c.i >= 0 && c.i < g.n1 && c.j >= 0 && c.j < g.n2;
}

}  // namespace

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Forward:
      return "forward";
    case Action::Backward:
      return "backward";
    case Action::Left:
      return "left";
    case Action::Right:
      return "right";
  }
  return "?";
}

Cell displace(Cell c, Action a) {
  switch (a) {
    case Action::Forward:
      return {c.i, c.j + 1};
    case Action::Backward:
      return {c.i, c.j - 1};
    case Action::Left:
      return {c.i - 1, c.j};
    case Action::Right:
      return {c.i + 1, c.j};
  }
  return c;
}

int manhattan(Cell a, Cell b) { return std::abs(a.i - b.i) + std::abs(a.j - b.j); }

void validate(const EnvConfig& config) {
  const GridSpec& g = config.grid;
  if (g.n1 < 2 || g.n2 < 2) {
    throw ConfigError("grid must be at least 2 x 2, got " + std::to_string(g.n1) + " x " +
                      std::to_string(g.n2));
  }
  if (!(g.cell_size_m > 0.0) || !std::isfinite(g.cell_size_m)) {
    throw ConfigError("cell size must be positive");
  }
  if (!(g.altitude_m > 0.0) || !std::isfinite(g.altitude_m)) {
    throw ConfigError("altitude must be positive");
  }
  if (!std::isfinite(g.origin.x) || !std::isfinite(g.origin.y)) {
    throw ConfigError("grid origin must be finite");
  }
  if (!inside(g, config.start_cell)) {
    throw ConfigError("start cell " + describe(config.start_cell) + " lies outside the grid");
  }
  if (!inside(g, config.terminal_cell)) {
    throw ConfigError("terminal cell " + describe(config.terminal_cell) +
                      " lies outside the grid");
  }
  if (config.start_cell == config.terminal_cell) {
    throw ConfigError("start cell and terminal cell must differ");
  }
  const int needed = manhattan(config.start_cell, config.terminal_cell);
  if (config.max_steps < needed) {
    throw ConfigError("max_steps " + std::to_string(config.max_steps) +
                      " is below the start-to-terminal distance " + std::to_string(needed));
  }
  if (!std::isfinite(config.boundary_reward)) {
    throw ConfigError("boundary reward must be finite");
  }
  try {
    validate(config.carrier);
    for (const auto& user : config.users) validate(user);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!(config.total_bandwidth_hz > 0.0)) {
    throw ConfigError("total bandwidth must be positive");
  }
  const double used = std::accumulate(
      config.users.begin(), config.users.end(), 0.0,
      [](double acc, const GroundUser& u) { return acc + u.bandwidth_hz; });
  if (used > config.total_bandwidth_hz) {
    throw ConfigError("users occupy " + std::to_string(used) +
                      " Hz, more than the total bandwidth " +
                      std::to_string(config.total_bandwidth_hz) + " Hz");
  }
  if (config.reward_override) {
    const auto expected = static_cast<std::size_t>(g.n1) * static_cast<std::size_t>(g.n2);
    if (config.reward_override->size() != expected) {
      throw ConfigError("reward override has " +
                        std::to_string(config.reward_override->size()) +
                        " entries, grid needs " + std::to_string(expected));
    }
    for (double r : *config.reward_override) {
      if (!std::isfinite(r)) throw ConfigError("reward override entries must be finite");
    }
  } else if (config.users.empty()) {
    throw ConfigError("at least one ground user is required without a reward override");
  }
}

EnvConfig synthetic_config(int n1, int n2, Cell start, Cell terminal, int max_steps,
                           double cell_reward) {
  EnvConfig config;
  config.grid.n1 = n1;
  config.grid.n2 = n2;
  config.start_cell = start;
  config.terminal_cell = terminal;
  config.max_steps = max_steps;
  config.reward_override =
      std::vector<double>(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2),
                          cell_reward);
  return config;
}

GridWorld::GridWorld(EnvConfig config) : config_(std::move(config)) {
  validate(config_);
  const std::size_t n = static_cast<std::size_t>(n1()) * static_cast<std::size_t>(n2());
  if (config_.reward_override) {
    rewards_ = *config_.reward_override;
  } else {
    rewards_.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
      rewards_[s] = sum_rate(cell_center(StateId{static_cast<std::uint32_t>(s)}),
                             config_.users, config_.carrier);
    }
  }
  terminal_bonus_ = kTerminalBonusFactor * *std::max_element(rewards_.begin(), rewards_.end());
  start_ = state_of(config_.start_cell);
  terminal_ = state_of(config_.terminal_cell);
}

bool GridWorld::contains(Cell c) const { return inside(config_.grid, c); }

StateId GridWorld::state_of(Cell c) const {
  if (!contains(c)) throw std::domain_error("cell " + describe(c) + " lies outside the grid");
  return StateId{static_cast<std::uint32_t>(c.j * n1() + c.i)};
}

Cell GridWorld::cell_of(StateId s) const {
  check(s);
  const int v = static_cast<int>(s.value);
  return {v % n1(), v / n1()};
}

Position3 GridWorld::cell_center(StateId s) const {
  const Cell c = cell_of(s);
  const GridSpec& g = config_.grid;
  return {g.origin.x + c.i * g.cell_size_m, g.origin.y + c.j * g.cell_size_m, g.altitude_m};
}

double GridWorld::cell_reward(StateId s) const {
  check(s);
  return rewards_[s.index()];
}

StepOutcome GridWorld::step(StateId s, Action a) const {
  if (is_terminal(s)) throw std::logic_error("step called on the terminal state");
  const Cell target = displace(cell_of(s), a);
  if (!contains(target)) {
    return {s, config_.boundary_reward, true, false};
  }
  const StateId next = state_of(target);
  if (next == terminal_) {
    return {next, terminal_bonus_, false, true};
  }
  return {next, rewards_[next.index()], false, false};
}

void GridWorld::check(StateId s) const {
  // rewards_ may still be empty while the table is being built.
  const auto n = static_cast<std::size_t>(n1()) * static_cast<std::size_t>(n2());
  if (s.index() >= n) {
    throw std::domain_error("state " + std::to_string(s.value) + " out of range");
  }
}

}  // namespace qirl
