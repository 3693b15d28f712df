// Two-qubit amplitude registers over the four eigenactions and the
// flexible-phase Grover operator G = U_A U_a applied once.
//
// Basis order is (forward, backward, left, right) <-> (|00>, |01>, |10>, |11>).
#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

#include "qirl/rng.hpp"

namespace qirl {

using Complex = std::complex<double>;

inline constexpr std::size_t kRegisterSize = 4;
inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kCollapseTolerance = 1e-6;

using Amplitudes = std::array<Complex, kRegisterSize>;
using Probabilities = std::array<double, kRegisterSize>;

class AmplitudeRegister {
 public:
  // Throws std::invalid_argument unless sum |h_n|^2 is 1 within kNormTolerance.
  explicit AmplitudeRegister(const Amplitudes& amps);

  // All amplitudes 1/2.
  static AmplitudeRegister uniform();
  // Rescales amps to unit norm. Throws std::invalid_argument on a zero vector.
  static AmplitudeRegister normalized(const Amplitudes& amps);
  // Skips the norm check; collapse() still refuses a non-normalized register.
  static AmplitudeRegister unchecked(const Amplitudes& amps);

  const Amplitudes& amplitudes() const { return amps_; }
  const Complex& operator[](std::size_t n) const { return amps_[n]; }
  Probabilities probabilities() const;
  double norm() const;

 private:
  struct Unchecked {};
  AmplitudeRegister(const Amplitudes& amps, Unchecked) : amps_(amps) {}

  Amplitudes amps_;
};

// Phase angles of U_a (phi1) and U_A (phi2), stored in [0, 2pi).
class PhasePair {
 public:
  // Throws std::invalid_argument on non-finite angles.
  PhasePair(double phi1, double phi2);

  double phi1() const { return phi1_; }
  double phi2() const { return phi2_; }

 private:
  double phi1_;
  double phi2_;
};

// Samples index n with probability probs[n] using one uniform draw.
// Throws std::domain_error if the entries are negative or do not sum to 1
// within kCollapseTolerance.
std::size_t sample_index(std::span<const double, kRegisterSize> probs, SplitMix64& rng);

// Measures the register without disturbing it.
std::size_t collapse(const AmplitudeRegister& reg, SplitMix64& rng);

// Builds U_a = I - (1 - e^{i phi1})|a><a| and U_A = (1 - e^{i phi2})|A><A| - I as
// explicit 4x4 matrices and applies their product to the register.
AmplitudeRegister grover_matrix(const AmplitudeRegister& reg, std::size_t target,
                                const PhasePair& phases);

// Closed form of the same operator:
//   Q = (1 - e^{i phi2}) [1 - (1 - e^{i phi1}) |h_i|^2]
//   h_i -> (Q - e^{i phi1}) h_i,   h_n -> (Q - 1) h_n  for n != i.
AmplitudeRegister grover_analytic(const AmplitudeRegister& reg, std::size_t target,
                                  const PhasePair& phases);

// Ratio of the target amplitude after one iteration to before it:
//   (1 - e^{i phi1} - e^{i phi2}) - (1 - e^{i phi1})(1 - e^{i phi2}) p.
// |ratio|^2 * p is the target probability after the iteration.
// Throws std::domain_error unless 0 <= p <= 1.
Complex amplitude_ratio(const PhasePair& phases, double p_target);

// Polar angle theta of the register on the {|a_i>, |a_i^perp>} sphere,
// cos(theta / 2) = |h_i|. Smaller theta means the target is more likely.
double polar_angle(const AmplitudeRegister& reg, std::size_t target);

}  // namespace qirl
