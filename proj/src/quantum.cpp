#include "qirl/quantum.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qirl {

namespace {

double squared_norm(const Amplitudes& amps) {
  double total = 0.0;
  for (const auto& h : amps) total += std::norm(h);
  return total;
}

void check_target(std::size_t target) {
  if (target >= kRegisterSize) {
    throw std::domain_error("target index " + std::to_string(target) + " out of range");
  }
}

double canonical_angle(double phi) {
  if (!std::isfinite(phi)) throw std::invalid_argument("phase angle must be finite");
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(phi, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a tiny negative number can round back up to exactly 2pi.
  return r >= two_pi ? 0.0 : r;
}

Complex phase(double phi) { return std::polar(1.0, phi); }

}  // namespace

AmplitudeRegister::AmplitudeRegister(const Amplitudes& amps) : amps_(amps) {
  const double n2 = squared_norm(amps_);
  if (!(std::abs(n2 - 1.0) <= kNormTolerance)) {
    throw std::invalid_argument("amplitude register is not normalized (sum |h|^2 = " +
                                std::to_string(n2) + ")");
  }
}

AmplitudeRegister AmplitudeRegister::uniform() {
  return AmplitudeRegister(Amplitudes{0.5, 0.5, 0.5, 0.5});
}

AmplitudeRegister AmplitudeRegister::normalized(const Amplitudes& amps) {
  const double n = std::sqrt(squared_norm(amps));
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("cannot normalize a zero or non-finite amplitude vector");
  }
  Amplitudes out;
  std::transform(amps.begin(), amps.end(), out.begin(), [n](Complex h) { return h / n; });
  return AmplitudeRegister(out, Unchecked{});
}

AmplitudeRegister AmplitudeRegister::unchecked(const Amplitudes& amps) {
  return AmplitudeRegister(amps, Unchecked{});
}

Probabilities AmplitudeRegister::probabilities() const {
  Probabilities p;
  std::transform(amps_.begin(), amps_.end(), p.begin(), [](Complex h) { return std::norm(h); });
  return p;
}

double AmplitudeRegister::norm() const { return std::sqrt(squared_norm(amps_)); }

PhasePair::PhasePair(double phi1, double phi2)
    : phi1_(canonical_angle(phi1)), phi2_(canonical_angle(phi2)) {}

std::size_t sample_index(std::span<const double, kRegisterSize> probs, SplitMix64& rng) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw std::domain_error("probabilities must be non-negative");
    total += p;
  }
  if (!(std::abs(total - 1.0) <= kCollapseTolerance)) {
    throw std::domain_error("probabilities sum to " + std::to_string(total) + ", not 1");
  }
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_live = 0;
  for (std::size_t n = 0; n < kRegisterSize; ++n) {
    if (probs[n] <= 0.0) continue;
    cumulative += probs[n];
    last_live = n;
    if (u < cumulative) return n;
  }
  // u landed in the rounding gap above the cumulative total.
  return last_live;
}

std::size_t collapse(const AmplitudeRegister& reg, SplitMix64& rng) {
  const Probabilities p = reg.probabilities();
  return sample_index(p, rng);
}

AmplitudeRegister grover_matrix(const AmplitudeRegister& reg, std::size_t target,
                                const PhasePair& phases) {
  check_target(target);
  Eigen::Vector4cd state;
  for (std::size_t n = 0; n < kRegisterSize; ++n) state(static_cast<Eigen::Index>(n)) = reg[n];

  const Eigen::Matrix4cd identity = Eigen::Matrix4cd::Identity();
  Eigen::Vector4cd basis = Eigen::Vector4cd::Zero();
  basis(static_cast<Eigen::Index>(target)) = 1.0;

  const Eigen::Matrix4cd u_target =
      identity - (1.0 - phase(phases.phi1())) * (basis * basis.adjoint());
  const Eigen::Matrix4cd u_state =
      (1.0 - phase(phases.phi2())) * (state * state.adjoint()) - identity;
  const Eigen::Vector4cd out = (u_state * u_target) * state;

  Amplitudes amps;
  for (std::size_t n = 0; n < kRegisterSize; ++n) amps[n] = out(static_cast<Eigen::Index>(n));
  return AmplitudeRegister::unchecked(amps);
}

AmplitudeRegister grover_analytic(const AmplitudeRegister& reg, std::size_t target,
                                  const PhasePair& phases) {
  check_target(target);
  const Complex e1 = phase(phases.phi1());
  const Complex e2 = phase(phases.phi2());
  const double p = std::norm(reg[target]);
  const Complex q = (1.0 - e2) * (1.0 - (1.0 - e1) * p);

  Amplitudes amps;
  for (std::size_t n = 0; n < kRegisterSize; ++n) {
    amps[n] = (n == target ? q - e1 : q - 1.0) * reg[n];
  }
  return AmplitudeRegister::unchecked(amps);
}

Complex amplitude_ratio(const PhasePair& phases, double p_target) {
  if (!(p_target >= 0.0 && p_target <= 1.0)) {
    throw std::domain_error("target probability must lie in [0, 1]");
  }
  const Complex e1 = phase(phases.phi1());
  const Complex e2 = phase(phases.phi2());
  return (1.0 - e1 - e2) - (1.0 - e1) * (1.0 - e2) * p_target;
}

double polar_angle(const AmplitudeRegister& reg, std::size_t target) {
  check_target(target);
  return 2.0 * std::acos(std::clamp(std::abs(reg[target]), 0.0, 1.0));
}

}  // namespace qirl
