#include "qirl/env_file.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace qirl {

EnvFileError::EnvFileError(std::string source, int line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message),
      source_(std::move(source)),
      line_(line) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const {
    const int line = at.IsDefined() ? at.Mark().line + 1 : 1;
    throw EnvFileError(source_, line, message);
  }

  void only_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed) const {
    if (!map.IsMap()) fail(map, "expected a mapping");
    const std::set<std::string_view> ok(allowed);
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!ok.contains(key)) fail(kv.first, "unknown key '" + key + "'");
    }
  }

  YAML::Node require(const YAML::Node& map, const char* key) const {
    YAML::Node n = map[key];
    if (!n) fail(map, std::string("missing required key '") + key + "'");
    return n;
  }

  template <typename T>
  T scalar(const YAML::Node& n, const char* what) const {
    if (!n.IsScalar()) fail(n, std::string(what) + " must be a scalar");
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      fail(n, std::string(what) + " has an invalid value '" + n.Scalar() + "'");
    }
  }

  double positive(const YAML::Node& map, const char* key) const {
    const YAML::Node n = require(map, key);
    const auto v = scalar<double>(n, key);
    if (!(v > 0.0) || !std::isfinite(v)) fail(n, std::string(key) + " must be positive");
    return v;
  }

  Cell cell(const YAML::Node& map, const char* key) const {
    const YAML::Node n = require(map, key);
    if (!n.IsSequence() || n.size() != 2) fail(n, std::string(key) + " must be [i, j]");
    return {scalar<int>(n[0], key), scalar<int>(n[1], key)};
  }

 private:
  std::string source_;
};

GroundUser read_user(const Reader& rd, const YAML::Node& n) {
  rd.only_keys(n, {"x_m", "y_m", "tx_power_w", "noise_power_w", "bandwidth_hz"});
  GroundUser u;
  u.position = {rd.scalar<double>(rd.require(n, "x_m"), "x_m"),
                rd.scalar<double>(rd.require(n, "y_m"), "y_m"), 0.0};
  if (!std::isfinite(u.position.x) || !std::isfinite(u.position.y)) {
    rd.fail(n, "user position must be finite");
  }
  u.tx_power_w = rd.positive(n, "tx_power_w");
  u.noise_power_w = rd.positive(n, "noise_power_w");
  u.bandwidth_hz = rd.positive(n, "bandwidth_hz");
  return u;
}

}  // namespace

EnvConfig parse_env_config(std::string_view text, std::string_view source) {
  const Reader rd{std::string(source)};
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw EnvFileError(std::string(source), e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw EnvFileError(std::string(source), 1, "expected a mapping at top level");
  rd.only_keys(root, {"grid", "start_cell", "terminal_cell", "carrier_freq_hz",
                      "total_bandwidth_hz", "max_steps", "max_flight_time_s",
                      "slot_duration_s", "boundary_reward", "users", "cell_rewards"});

  EnvConfig cfg;
  const YAML::Node grid = rd.require(root, "grid");
  rd.only_keys(grid, {"cells_x", "cells_y", "cell_size_m", "origin_m", "altitude_m"});
  cfg.grid.n1 = rd.scalar<int>(rd.require(grid, "cells_x"), "cells_x");
  cfg.grid.n2 = rd.scalar<int>(rd.require(grid, "cells_y"), "cells_y");
  if (cfg.grid.n1 < 2 || cfg.grid.n2 < 2) rd.fail(grid, "grid must be at least 2 x 2 cells");
  cfg.grid.cell_size_m = rd.positive(grid, "cell_size_m");
  cfg.grid.altitude_m = rd.positive(grid, "altitude_m");
  const YAML::Node origin = rd.require(grid, "origin_m");
  if (!origin.IsSequence() || origin.size() != 2) rd.fail(origin, "origin_m must be [x, y]");
  cfg.grid.origin = {rd.scalar<double>(origin[0], "origin_m"),
                     rd.scalar<double>(origin[1], "origin_m"), cfg.grid.altitude_m};

  const auto inside = [&](Cell c) {
    return c.i >= 0 && c.i < cfg.grid.n1 && c.j >= 0 && c.j < cfg.grid.n2;
  };
  cfg.start_cell = rd.cell(root, "start_cell");
  if (!inside(cfg.start_cell)) rd.fail(root["start_cell"], "start_cell lies outside the grid");
  cfg.terminal_cell = rd.cell(root, "terminal_cell");
  if (!inside(cfg.terminal_cell)) {
    rd.fail(root["terminal_cell"], "terminal_cell lies outside the grid");
  }
  if (cfg.start_cell == cfg.terminal_cell) {
    rd.fail(root["terminal_cell"], "terminal_cell must differ from start_cell");
  }

  cfg.carrier.carrier_freq_hz = rd.positive(root, "carrier_freq_hz");
  cfg.total_bandwidth_hz = rd.positive(root, "total_bandwidth_hz");

  if (root["max_steps"]) {
    if (root["max_flight_time_s"] || root["slot_duration_s"]) {
      rd.fail(root["max_steps"], "give either max_steps or max_flight_time_s/slot_duration_s");
    }
    cfg.max_steps = rd.scalar<int>(root["max_steps"], "max_steps");
  } else {
    const double e = rd.positive(root, "max_flight_time_s");
    const double t = rd.positive(root, "slot_duration_s");
    cfg.max_steps = static_cast<int>(std::floor(e / t));
  }
  const YAML::Node budget_at = root["max_steps"] ? root["max_steps"] : root["max_flight_time_s"];
  if (cfg.max_steps < manhattan(cfg.start_cell, cfg.terminal_cell)) {
    rd.fail(budget_at, "step budget " + std::to_string(cfg.max_steps) +
                           " cannot reach the terminal cell from the start cell");
  }

  if (const YAML::Node b = root["boundary_reward"]) {
    cfg.boundary_reward = rd.scalar<double>(b, "boundary_reward");
    if (!std::isfinite(cfg.boundary_reward)) rd.fail(b, "boundary_reward must be finite");
  }

  double used = 0.0;
  if (const YAML::Node users = root["users"]) {
    if (!users.IsSequence()) rd.fail(users, "users must be a list");
    for (const auto& u : users) {
      cfg.users.push_back(read_user(rd, u));
      used += cfg.users.back().bandwidth_hz;
    }
    if (used > cfg.total_bandwidth_hz) {
      rd.fail(users, "users occupy more bandwidth than total_bandwidth_hz");
    }
  }

  const std::size_t cells =
      static_cast<std::size_t>(cfg.grid.n1) * static_cast<std::size_t>(cfg.grid.n2);
  if (const YAML::Node r = root["cell_rewards"]) {
    std::vector<double> table;
    if (r.IsScalar()) {
      table.assign(cells, rd.scalar<double>(r, "cell_rewards"));
    } else if (r.IsSequence()) {
      if (r.size() != cells) {
        rd.fail(r, "cell_rewards has " + std::to_string(r.size()) + " entries, grid needs " +
                       std::to_string(cells));
      }
      for (const auto& v : r) table.push_back(rd.scalar<double>(v, "cell_rewards"));
    } else {
      rd.fail(r, "cell_rewards must be a number or a list");
    }
    for (double v : table) {
      if (!std::isfinite(v)) rd.fail(r, "cell_rewards must be finite");
    }
    cfg.reward_override = std::move(table);
  } else if (cfg.users.empty()) {
    rd.fail(root, "at least one user is required unless cell_rewards is given");
  }

  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw EnvFileError(std::string(source), 1, e.what());
  }
  return cfg;
}

EnvConfig load_env_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EnvFileError(path.string(), 0, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_env_config(buf.str(), path.string());
}

}  // namespace qirl
