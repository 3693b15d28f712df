#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "qirl/env_file.hpp"
#include "qirl/gridworld.hpp"

using namespace qirl;

namespace {

const std::string kConfigDir = QIRL_CONFIG_DIR;

GridWorld uplink_env() { return GridWorld(load_env_file(kConfigDir + "/uplink_10x10.yaml")); }

EnvConfig single_user_2x2() {
  EnvConfig cfg;
  cfg.grid = {2, 2, 20.0, {10, 10, 0}, 100.0};
  cfg.start_cell = {0, 0};
  cfg.terminal_cell = {1, 1};
  cfg.max_steps = 10;
  GroundUser u;
  u.position = {14, 3, 0};
  cfg.users = {u};
  return cfg;
}

}  // namespace

TEST_CASE("10x10 environment geometry") {
  const GridWorld env = uplink_env();
  CHECK(env.num_states() == 100);
  CHECK(env.max_steps() == 900);
  for (double r : env.reward_table()) CHECK(r > 0.0);

  CHECK(env.cell_center(env.state_of({0, 0})) == Position3{10, 10, 100});
  CHECK(env.cell_center(env.state_of({9, 0})) == Position3{190, 10, 100});
  CHECK(env.cell_center(env.state_of({0, 9})) == Position3{10, 190, 100});
  CHECK(env.cell_center(env.start()) == Position3{10, 190, 100});
  CHECK(env.cell_center(env.terminal()) == Position3{190, 10, 100});
}

TEST_CASE("reward table matches direct channel evaluation") {
  const GridWorld env = uplink_env();
  const auto& users = env.config().users;
  for (std::uint32_t s = 0; s < env.num_states(); ++s) {
    const double direct = sum_rate(env.cell_center({s}), users, env.config().carrier);
    CHECK(std::abs(env.cell_reward({s}) - direct) <= 1e-12 * direct);
  }
  const double top = *std::max_element(env.reward_table().begin(), env.reward_table().end());
  CHECK(env.terminal_bonus() == 10.0 * top);
}

TEST_CASE("terminal bonus on a single-user 2x2 grid") {
  const GridWorld env(single_user_2x2());
  double top = 0.0;
  for (std::uint32_t s = 0; s < 4; ++s) top = std::max(top, env.cell_reward({s}));
  CHECK(env.terminal_bonus() == 10.0 * top);
}

TEST_CASE("uniform override gives bonus 10") {
  const GridWorld env(synthetic_config(3, 3, {0, 0}, {2, 2}, 4));
  CHECK(env.terminal_bonus() == 10.0);
}

TEST_CASE("state ids flatten row-major in x") {
  const GridWorld env = uplink_env();
  CHECK(env.state_of({3, 7}).value == 73);
  CHECK(env.cell_of({73}) == Cell{3, 7});
  CHECK_THROWS_AS(env.state_of({10, 0}), std::domain_error);
  CHECK_THROWS_AS(env.cell_center({100}), std::domain_error);
}

TEST_CASE("step examples") {
  const GridWorld env = uplink_env();
  const StateId origin = env.state_of({0, 0});

  const StepOutcome wall = env.step(origin, Action::Left);
  CHECK(wall.next_state == origin);
  CHECK(wall.reward == 0.0);
  CHECK(wall.boundary_hit);
  CHECK_FALSE(wall.terminal);

  const StepOutcome last = env.step(env.state_of({8, 0}), Action::Right);
  CHECK(last.terminal);
  CHECK(last.next_state == env.terminal());
  CHECK(last.reward == env.terminal_bonus());

  const StepOutcome inner = env.step(env.state_of({2, 2}), Action::Right);
  CHECK(inner.next_state == env.state_of({3, 2}));
  CHECK(inner.reward == env.cell_reward(env.state_of({3, 2})));
  CHECK_FALSE(inner.boundary_hit);

  CHECK(env.step(env.state_of({2, 2}), Action::Forward).next_state == env.state_of({2, 3}));
  CHECK(env.step(env.state_of({2, 2}), Action::Backward).next_state == env.state_of({2, 1}));
  CHECK(env.step(env.state_of({2, 2}), Action::Left).next_state == env.state_of({1, 2}));

  CHECK_THROWS_AS(env.step(env.terminal(), Action::Left), std::logic_error);
}

TEST_CASE("steps are deterministic and honour the outcome invariants") {
  const GridWorld env = uplink_env();
  for (std::uint32_t s = 0; s < env.num_states(); ++s) {
    if (env.is_terminal({s})) continue;
    for (Action a : kAllActions) {
      const StepOutcome o = env.step({s}, a);
      CHECK(o == env.step({s}, a));
      if (o.boundary_hit) {
        CHECK(o.next_state == StateId{s});
        CHECK(o.reward == 0.0);
      }
      if (o.terminal) CHECK(o.next_state == env.terminal());
    }
  }
}

TEST_CASE("terminal reachable from every cell within n1 + n2 steps") {
  const GridWorld env = uplink_env();
  std::vector<int> dist(env.num_states(), -1);
  std::queue<StateId> frontier;
  dist[env.terminal().index()] = 0;
  frontier.push(env.terminal());
  // Moves are reversible, so a search outward from the terminal suffices.
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop();
    const Cell c = env.cell_of(s);
    for (Action a : kAllActions) {
      const Cell n = displace(c, a);
      if (!env.contains(n)) continue;
      const StateId t = env.state_of(n);
      if (dist[t.index()] >= 0) continue;
      dist[t.index()] = dist[s.index()] + 1;
      frontier.push(t);
    }
  }
  for (int d : dist) {
    CHECK(d >= 0);
    CHECK(d <= env.n1() + env.n2());
  }
}

TEST_CASE("config validation names the violated constraint") {
  auto expect_error = [](EnvConfig cfg, const std::string& fragment) {
    try {
      validate(cfg);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos, e.what());
    }
  };
  EnvConfig cfg = synthetic_config(3, 3, {0, 0}, {2, 2}, 4);
  cfg.terminal_cell = cfg.start_cell;
  expect_error(cfg, "start");

  cfg = synthetic_config(3, 3, {0, 0}, {2, 2}, 3);
  expect_error(cfg, "max_steps");

  cfg = synthetic_config(3, 3, {0, 0}, {5, 2}, 10);
  expect_error(cfg, "terminal");

  cfg = single_user_2x2();
  cfg.users.push_back(cfg.users.front());
  cfg.total_bandwidth_hz = 3e6;
  expect_error(cfg, "bandwidth");

  cfg = single_user_2x2();
  cfg.grid.n1 = 1;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("layout parser") {
  const EnvConfig cfg = load_env_file(kConfigDir + "/uplink_10x10.yaml");
  CHECK(cfg.grid.n1 == 10);
  CHECK(cfg.users.size() == 5);
  CHECK(cfg.max_steps == 900);
  CHECK(cfg.start_cell == Cell{0, 9});
  CHECK(cfg.users[2].position == Position3{110, 70, 0});
}

TEST_CASE("layout parser reports the offending line") {
  const std::string text =
      "grid: {cells_x: 3, cells_y: 3, cell_size_m: 20, origin_m: [10, 10], altitude_m: 100}\n"
      "start_cell: [0, 0]\n"
      "terminal_cell: [0, 0]\n"
      "carrier_freq_hz: 2.0e9\n"
      "total_bandwidth_hz: 1.0e7\n"
      "max_steps: 4\n"
      "cell_rewards: 1\n";
  try {
    parse_env_config(text, "bad.yaml");
    FAIL("expected EnvFileError");
  } catch (const EnvFileError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).rfind("bad.yaml:3:", 0) == 0);
  }

  try {
    parse_env_config("grid: {cells_x: 3}\nspeed: 4\n", "x.yaml");
    FAIL("expected EnvFileError");
  } catch (const EnvFileError& e) {
    CHECK(e.line() >= 1);
  }
  CHECK_THROWS_AS(parse_env_config("grid: [unclosed\n", "y.yaml"), EnvFileError);
}
