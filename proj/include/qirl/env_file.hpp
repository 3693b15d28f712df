// Environment layout files (YAML). See configs/uplink_10x10.yaml for the full schema.
//
//   grid:                 cells_x, cells_y, cell_size_m, origin_m: [x, y], altitude_m
//   start_cell:           [i, j]
//   terminal_cell:        [i, j]
//   carrier_freq_hz:      carrier frequency
//   total_bandwidth_hz:   system bandwidth B
//   max_steps:            step budget, or max_flight_time_s + slot_duration_s
//   boundary_reward:      optional, default 0
//   users:                list of {x_m, y_m, tx_power_w, noise_power_w, bandwidth_hz}
//   cell_rewards:         optional scalar or list of cells_x * cells_y values
#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "qirl/gridworld.hpp"

namespace qirl {

// Parse or validation failure. what() reads "<source>:<line>: <message>".
class EnvFileError : public std::runtime_error {
 public:
  EnvFileError(std::string source, int line, const std::string& message);

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

EnvConfig parse_env_config(std::string_view text, std::string_view source = "<string>");
EnvConfig load_env_file(const std::filesystem::path& path);

}  // namespace qirl
