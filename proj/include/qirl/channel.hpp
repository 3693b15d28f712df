// Line-of-sight air-to-ground channel: path loss, SNR and weighted sum uplink rate.
#pragma once

#include <span>

namespace qirl {

struct Position3 {
  double x = 0.0;  // meters
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Position3&, const Position3&) = default;
};

double distance(const Position3& a, const Position3& b);

struct CarrierConfig {
  double carrier_freq_hz = 2e9;
};

// One uplink ground user. Ground users sit on the ground plane (z = 0).
struct GroundUser {
  Position3 position;
  double tx_power_w = 1.0;
  double noise_power_w = 1.0;
  double bandwidth_hz = 2e6;
};

// Throws std::invalid_argument if a field violates its constraint.
void validate(const CarrierConfig& carrier);
void validate(const GroundUser& user);

// 20 lg(d) + 20 lg(f) - 147.55. Throws std::domain_error for d <= 0.
double path_loss_db(double distance_m, const CarrierConfig& carrier);

// Linear received SNR P / (sigma^2 * 10^(PL/10)).
double snr(double path_loss_db, const GroundUser& user);

// Sum over users of bandwidth * log2(1 + SNR), in bits/s.
// Throws std::domain_error on an empty user list or a UAV at or below ground.
double sum_rate(const Position3& uav, std::span<const GroundUser> users,
                const CarrierConfig& carrier);

}  // namespace qirl
