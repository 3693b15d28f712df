#include "qirl/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qirl {

namespace {

constexpr double kFreeSpaceConstantDb = 147.55;

bool finite(const Position3& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

}  // namespace

double distance(const Position3& a, const Position3& b) {
  return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

void validate(const CarrierConfig& carrier) {
  if (!(carrier.carrier_freq_hz > 0.0) || !std::isfinite(carrier.carrier_freq_hz)) {
    throw std::invalid_argument("carrier frequency must be positive and finite");
  }
}

void validate(const GroundUser& user) {
  if (!finite(user.position)) {
    throw std::invalid_argument("ground user position must be finite");
  }
  if (user.position.z != 0.0) {
    throw std::invalid_argument("ground user must sit at z = 0, got z = " +
                                std::to_string(user.position.z));
  }
  if (!(user.tx_power_w > 0.0)) {
    throw std::invalid_argument("ground user transmit power must be positive");
  }
  if (!(user.noise_power_w > 0.0)) {
    throw std::invalid_argument("ground user noise power must be positive");
  }
  if (!(user.bandwidth_hz > 0.0)) {
    throw std::invalid_argument("ground user bandwidth must be positive");
  }
}

double path_loss_db(double distance_m, const CarrierConfig& carrier) {
  if (!(distance_m > 0.0)) {
    throw std::domain_error("path loss needs a positive distance, got " +
                            std::to_string(distance_m));
  }
  return 20.0 * std::log10(distance_m) + 20.0 * std::log10(carrier.carrier_freq_hz) -
         kFreeSpaceConstantDb;
}

double snr(double path_loss_db, const GroundUser& user) {
  return user.tx_power_w / (user.noise_power_w * std::pow(10.0, path_loss_db / 10.0));
}

double sum_rate(const Position3& uav, std::span<const GroundUser> users,
                const CarrierConfig& carrier) {
  if (users.empty()) {
    throw std::domain_error("sum rate needs at least one ground user");
  }
  if (!(uav.z > 0.0)) {
    throw std::domain_error("UAV altitude must be positive");
  }
  double rate = 0.0;
  for (const auto& user : users) {
    const double gamma = snr(path_loss_db(distance(uav, user.position), carrier), user);
    // log1p keeps precision at the ~1e-8 SNRs typical of this link budget.
    rate += user.bandwidth_hz * std::log1p(gamma) / std::numbers::ln2;
  }
  return rate;
}

}  // namespace qirl
