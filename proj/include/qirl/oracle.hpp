// Exact solvers for the best terminal-reaching episode return on a GridWorld.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qirl/gridworld.hpp"

namespace qirl {

struct DPResult {
  double optimal_return = 0.0;
  std::vector<StateId> optimal_path;  // start cell first, terminal cell last
  int horizon_used = 0;               // steps taken by optimal_path
  bool feasible = false;
};

// Backward induction over (remaining steps, state) up to the env's step budget.
// Rebounds are part of the action model. Ties go to the first action in
// (forward, backward, left, right) order.
DPResult dp_optimal(const GridWorld& env);
DPResult dp_optimal(const GridWorld& env, int horizon);

struct EnumerationResult {
  double best_return = 0.0;
  std::vector<StateId> best_path;
  bool feasible = false;
  std::uint64_t sequences = 0;  // action sequences examined to completion
};

inline constexpr int kMaxEnumerationCells = 16;
inline constexpr int kMaxEnumerationLength = 12;

class EnumerationTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Depth-first search over every action sequence of length <= max_len; a
// sequence ends early when it enters the terminal cell. Refuses grids with more
// than kMaxEnumerationCells cells or max_len above kMaxEnumerationLength.
EnumerationResult enumerate_paths(const GridWorld& env, int max_len);

}  // namespace qirl
