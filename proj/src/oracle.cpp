#include "qirl/oracle.hpp"

#include <limits>
#include <string>

namespace qirl {

namespace {

constexpr double kUnreachable = -std::numeric_limits<double>::infinity();

}  // namespace

DPResult dp_optimal(const GridWorld& env) { return dp_optimal(env, env.max_steps()); }

DPResult dp_optimal(const GridWorld& env, int horizon) {
  const std::size_t n = env.num_states();
  const auto steps = static_cast<std::size_t>(horizon);

  // best[t][s]: largest return collectable from s with t steps left that ends
  // in the terminal cell. The terminal cell is absorbing with value 0.
  std::vector<std::vector<double>> best(steps + 1, std::vector<double>(n, kUnreachable));
  best[0][env.terminal().index()] = 0.0;
  for (std::size_t t = 1; t <= steps; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const StateId s{static_cast<std::uint32_t>(i)};
      if (env.is_terminal(s)) {
        best[t][i] = 0.0;
        continue;
      }
      double value = kUnreachable;
      for (Action a : kAllActions) {
        const StepOutcome o = env.step(s, a);
        const double tail = o.terminal ? 0.0 : best[t - 1][o.next_state.index()];
        if (tail == kUnreachable) continue;
        const double candidate = o.reward + tail;
        if (candidate > value) value = candidate;
      }
      best[t][i] = value;
    }
  }

  DPResult out;
  const StateId start = env.start();
  if (best[steps][start.index()] == kUnreachable) return out;

  out.feasible = true;
  out.optimal_return = best[steps][start.index()];
  out.optimal_path.push_back(start);
  StateId s = start;
  for (std::size_t t = steps; t > 0 && !env.is_terminal(s); --t) {
    for (Action a : kAllActions) {
      const StepOutcome o = env.step(s, a);
      const double tail = o.terminal ? 0.0 : best[t - 1][o.next_state.index()];
      if (tail != kUnreachable && o.reward + tail == best[t][s.index()]) {
        s = o.next_state;
        break;
      }
    }
    out.optimal_path.push_back(s);
  }
  out.horizon_used = static_cast<int>(out.optimal_path.size()) - 1;
  return out;
}

namespace {

struct Search {
  const GridWorld& env;
  EnumerationResult& result;

  // Returns the best suffix return from s with `left` steps remaining, or
  // kUnreachable. best_suffix receives the matching path.
  double visit(StateId s, int left, std::vector<StateId>& best_suffix) {
    if (left == 0) {
      ++result.sequences;
      return kUnreachable;
    }
    double best = kUnreachable;
    for (Action a : kAllActions) {
      const StepOutcome o = env.step(s, a);
      std::vector<StateId> suffix;
      double value;
      if (o.terminal) {
        ++result.sequences;
        value = o.reward;
      } else {
        const double tail = visit(o.next_state, left - 1, suffix);
        value = tail == kUnreachable ? kUnreachable : o.reward + tail;
      }
      if (value != kUnreachable && value > best) {
        best = value;
        suffix.insert(suffix.begin(), o.next_state);
        best_suffix = std::move(suffix);
      }
    }
    return best;
  }
};

}  // namespace

EnumerationResult enumerate_paths(const GridWorld& env, int max_len) {
  const auto cells = env.num_states();
  if (cells > static_cast<std::size_t>(kMaxEnumerationCells) || max_len > kMaxEnumerationLength ||
      max_len < 0) {
    throw EnumerationTooLarge("enumeration refused: " + std::to_string(cells) + " cells (max " +
                              std::to_string(kMaxEnumerationCells) + "), length " +
                              std::to_string(max_len) + " (max " +
                              std::to_string(kMaxEnumerationLength) + ")");
  }
  EnumerationResult result;
  Search search{env, result};
  std::vector<StateId> suffix;
  const double best = search.visit(env.start(), max_len, suffix);
  if (best != kUnreachable) {
    result.feasible = true;
    result.best_return = best;
    result.best_path.push_back(env.start());
    result.best_path.insert(result.best_path.end(), suffix.begin(), suffix.end());
  }
  return result;
}

}  // namespace qirl
