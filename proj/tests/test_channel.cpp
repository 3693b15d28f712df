#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "qirl/channel.hpp"

using namespace qirl;

namespace {

GroundUser user_at(double x, double y, double power = 1.0) {
  GroundUser u;
  u.position = {x, y, 0.0};
  u.tx_power_w = power;
  return u;
}

}  // namespace

TEST_CASE("path loss at reference points") {
  const CarrierConfig c{2e9};
  CHECK(std::abs(path_loss_db(100.0, c) - 78.4706) < 1e-3);
  CHECK(std::abs(path_loss_db(200.0, c) - 84.4912) < 1e-3);
  // Offline double-precision evaluation of the formula.
  CHECK(std::abs(path_loss_db(100.0, c) - 78.47059991327961) < 1e-12);

  const CarrierConfig cancel{std::pow(10.0, 147.55 / 20.0)};
  CHECK(std::abs(path_loss_db(1.0, cancel)) < 1e-12);
}

TEST_CASE("path loss rejects non-positive distance") {
  CHECK_THROWS_AS(path_loss_db(0.0, {}), std::domain_error);
  CHECK_THROWS_AS(path_loss_db(-3.0, {}), std::domain_error);
}

TEST_CASE("path loss grows 20 dB per decade") {
  const CarrierConfig c{2e9};
  for (double d : {0.5, 1.0, 37.0, 100.0, 1234.5, 9e5}) {
    CHECK(std::abs(path_loss_db(d, c) - path_loss_db(d / 10.0, c) - 20.0) < 1e-9);
  }
}

TEST_CASE("snr examples") {
  GroundUser u = user_at(0, 0);
  CHECK(snr(0.0, u) == 1.0);
  // 10^-7.84706 evaluated offline.
  const double expected = 1.4221322987123173e-08;
  CHECK(std::abs(snr(78.4706, u) - expected) / expected < 1e-9);

  u.tx_power_w = 2.0;
  CHECK(std::abs(snr(10.0, u) - 0.2) < 1e-15);
}

TEST_CASE("single user directly below the UAV") {
  const std::vector<GroundUser> users{user_at(0, 0)};
  const double rate = sum_rate({0, 0, 100}, users, {2e9});
  // 2e6 * log2(1 + 10^(-PL/10)) at d = 100 m, evaluated offline in 40-digit arithmetic.
  CHECK(std::abs(rate - 0.04103406482439878) / 0.04103406482439878 < 1e-9);
}

TEST_CASE("rate vanishes as transmit power goes to zero") {
  const std::vector<GroundUser> users{user_at(30, 40, 1e-300)};
  CHECK(sum_rate({0, 0, 100}, users, {}) < 1e-290);
}

TEST_CASE("co-located users double the rate and rates add over users") {
  const Position3 uav{15, 25, 100};
  const std::vector<GroundUser> one{user_at(50, 60)};
  const std::vector<GroundUser> two{user_at(50, 60), user_at(50, 60)};
  CHECK(sum_rate(uav, two, {}) == 2.0 * sum_rate(uav, one, {}));

  const std::vector<GroundUser> a{user_at(10, 10), user_at(170, 30)};
  const std::vector<GroundUser> b{user_at(90, 150, 0.5)};
  std::vector<GroundUser> ab = a;
  ab.insert(ab.end(), b.begin(), b.end());
  const double lhs = sum_rate(uav, ab, {});
  const double rhs = sum_rate(uav, a, {}) + sum_rate(uav, b, {});
  CHECK(std::abs(lhs - rhs) / rhs < 1e-12);
}

TEST_CASE("rate decreases with horizontal distance") {
  const std::vector<GroundUser> users{user_at(0, 0), user_at(-200, 50)};
  double prev = sum_rate({0, 0, 100}, users, {});
  for (double x = 5; x <= 500; x += 5) {
    std::vector<GroundUser> moved = users;
    moved[0].position.x = x;
    const double r = sum_rate({0, 0, 100}, moved, {});
    CHECK(r < prev);
    prev = r;
  }
}

TEST_CASE("sum_rate preconditions") {
  CHECK_THROWS_AS(sum_rate({0, 0, 100}, {}, {}), std::domain_error);
  const std::vector<GroundUser> users{user_at(0, 0)};
  CHECK_THROWS_AS(sum_rate({0, 0, 0}, users, {}), std::domain_error);
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(validate(CarrierConfig{0.0}), std::invalid_argument);
  GroundUser u = user_at(1, 2);
  CHECK_NOTHROW(validate(u));
  u.position.z = 1.0;
  CHECK_THROWS_AS(validate(u), std::invalid_argument);
  u = user_at(1, 2);
  u.noise_power_w = 0.0;
  CHECK_THROWS_AS(validate(u), std::invalid_argument);
  u = user_at(1, 2);
  u.bandwidth_hz = -1.0;
  CHECK_THROWS_AS(validate(u), std::invalid_argument);
}
