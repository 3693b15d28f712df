// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the number
// of failed criteria (0 when all pass).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "qirl/channel.hpp"
#include "qirl/harness.hpp"
#include "qirl/oracle.hpp"
#include "qirl/quantum.hpp"

using namespace qirl;

namespace {

const std::filesystem::path kConfigDir = QIRL_CONFIG_DIR;
constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("[%s] %-3s %s\n", ok ? "PASS" : "FAIL", id, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

struct GroverCase {
  AmplitudeRegister reg = AmplitudeRegister::uniform();
  std::size_t target = 0;
  PhasePair phases{0.0, 0.0};
};

std::vector<GroverCase> grover_cases() {
  SplitMix64 rng(20240101);
  std::vector<GroverCase> cases;
  for (int k = 0; k < 1000; ++k) {
    Amplitudes a;
    for (auto& h : a) h = {rng.uniform() - 0.5, rng.uniform() - 0.5};
    GroverCase c;
    c.reg = AmplitudeRegister::normalized(a);
    c.target = rng.below(kRegisterSize);
    c.phases = PhasePair(2 * kPi * rng.uniform(), 2 * kPi * rng.uniform());
    cases.push_back(c);
  }
  return cases;
}

void criterion_1_and_2() {
  const auto cases = grover_cases();
  Stopwatch clock;
  double worst_component = 0.0;
  double worst_norm = 0.0;
  double worst_ratio = 0.0;
  for (const auto& c : cases) {
    const auto m = grover_matrix(c.reg, c.target, c.phases);
    const auto a = grover_analytic(c.reg, c.target, c.phases);
    for (std::size_t n = 0; n < kRegisterSize; ++n) {
      worst_component = std::max(worst_component, std::abs(m[n] - a[n]));
    }
    worst_norm = std::max({worst_norm, std::abs(m.norm() - 1.0), std::abs(a.norm() - 1.0)});
    const double p = c.reg.probabilities()[c.target];
    const double via_ratio = std::norm(amplitude_ratio(c.phases, p)) * p;
    worst_ratio = std::max(worst_ratio, std::abs(via_ratio - m.probabilities()[c.target]));
  }
  const double t = clock.seconds();
  report("1", worst_component <= 1e-12 && worst_norm <= 1e-12 && t < 1.0,
         fmt("analytic vs matrix over 1000 cases: max |diff| %.3g, max |norm-1| %.3g, %.3f s",
             worst_component, worst_norm, t));
  report("2", worst_ratio <= 1e-12,
         fmt("|R|^2 p vs matrix target probability: max |diff| %.3g", worst_ratio));
}

void criterion_3() {
  const auto out = grover_matrix(AmplitudeRegister::uniform(), 0, PhasePair(kPi, kPi));
  const double p = out.probabilities()[0];
  report("3", std::abs(p - 1.0) <= 1e-12, fmt("uniform register, phases (pi, pi): p0 = %.17g", p));
}

void criterion_4() {
  const Probabilities p{0.1, 0.2, 0.3, 0.4};
  Amplitudes a;
  for (std::size_t n = 0; n < kRegisterSize; ++n) a[n] = std::sqrt(p[n]);
  const AmplitudeRegister reg(a);
  SplitMix64 rng(4);
  Stopwatch clock;
  std::array<int, kRegisterSize> counts{};
  constexpr int kDraws = 100000;
  for (int k = 0; k < kDraws; ++k) ++counts[collapse(reg, rng)];
  const double t = clock.seconds();
  double worst = 0.0;
  for (std::size_t n = 0; n < kRegisterSize; ++n) {
    worst = std::max(worst, std::abs(counts[n] / double(kDraws) - p[n]));
  }
  report("4", worst <= 0.01 && t < 1.0,
         fmt("frequencies %.4f %.4f %.4f %.4f, max deviation %.4f, %.3f s", counts[0] / 1e5,
             counts[1] / 1e5, counts[2] / 1e5, counts[3] / 1e5, worst, t));
}

void criterion_5() {
  const double pl = path_loss_db(100.0, CarrierConfig{2e9});
  report("5", std::abs(pl - 78.4706) <= 0.001, fmt("path_loss_db(100 m, 2 GHz) = %.6f dB", pl));
}

void criterion_6() {
  SplitMix64 rng(6);
  int instances = 0;
  int mismatches = 0;
  const auto check = [&](const EnvConfig& cfg) {
    const GridWorld env(cfg);
    const DPResult dp = dp_optimal(env);
    const EnumerationResult en = enumerate_paths(env, env.max_steps());
    ++instances;
    if (dp.feasible != en.feasible || dp.optimal_return != en.best_return) ++mismatches;
  };
  // Every grid shape up to 4 x 4, with random rewards, endpoints and budgets up to 12.
  for (int n1 = 2; n1 <= 4; ++n1) {
    for (int n2 = 2; n2 <= 4; ++n2) {
      for (int trial = 0; trial < 12; ++trial) {
        const Cell start{int(rng.below(n1)), int(rng.below(n2))};
        Cell terminal = start;
        while (terminal == start) terminal = {int(rng.below(n1)), int(rng.below(n2))};
        const int reach = manhattan(start, terminal);
        const int cap = n1 * n2 == 16 ? 10 : 12;
        const int budget = reach + int(rng.below(cap - reach + 1));
        EnvConfig cfg = synthetic_config(n1, n2, start, terminal, budget);
        for (auto& r : *cfg.reward_override) r = std::round(rng.uniform() * 40.0) / 8.0;
        check(cfg);
      }
    }
  }
  // The largest size allowed: 4 x 4 with a 12-step budget.
  EnvConfig big = synthetic_config(4, 4, {0, 0}, {3, 3}, 12);
  for (auto& r : *big.reward_override) r = std::round(rng.uniform() * 40.0) / 8.0;
  check(big);

  const GridWorld tiny(synthetic_config(3, 3, {0, 0}, {2, 2}, 4));
  const double value = dp_optimal(tiny).optimal_return;
  const double enumerated = enumerate_paths(tiny, 4).best_return;
  report("6", mismatches == 0 && value == 13.0 && enumerated == 13.0,
         fmt("%d tiny envs, %d dp/enumeration mismatches; 3x3 uniform value %g (enumerated %g)",
             instances, mismatches, value, enumerated));
}

void criterion_7() {
  Stopwatch clock;
  std::string detail;
  bool ok = true;
  for (AgentKind kind :
       {AgentKind::QiRL, AgentKind::QLearningEpsilon, AgentKind::QLearningBoltzmann}) {
    RunConfig cfg = load_run_config(kConfigDir / "run_tiny.yaml");
    cfg.agent = kind;
    cfg.episodes = 2000;
    cfg.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
    const RunResult r = run(cfg);
    int optimal = 0;
    for (const auto& s : r.seeds) {
      if (s.metric.oracle_gap && *s.metric.oracle_gap == 0.0) ++optimal;
    }
    ok = ok && optimal >= 18;
    detail += fmt("%s %d/20, ", r.agent.c_str(), optimal);
  }
  const double t = clock.seconds();
  report("7", ok && t < 30.0, detail + fmt("zero-gap seeds (need 18), %.2f s", t));
}

void criterion_8() {
  Stopwatch clock;
  std::vector<std::string> lines;
  bool all_terminal = true;
  std::optional<double> qirl_median, eps_median;
  double qirl_gap_worst = 0.0;
  int qirl_within = 0;
  double oracle = 0.0;
  std::string terminal_detail;
  for (AgentKind kind :
       {AgentKind::QiRL, AgentKind::QLearningEpsilon, AgentKind::QLearningBoltzmann}) {
    RunConfig cfg = load_run_config(kConfigDir / "run_10x10.yaml");
    cfg.agent = kind;
    cfg.episodes = 1000;
    cfg.seeds.clear();
    for (std::uint64_t s = 1; s <= 20; ++s) cfg.seeds.push_back(s);
    const RunResult r = run(cfg);
    oracle = r.oracle.optimal_return;
    int reached = 0;
    for (const auto& s : r.seeds) {
      if (s.greedy.reached_terminal) ++reached;
    }
    all_terminal = all_terminal && reached == 20;
    terminal_detail += fmt("%s %d/20, ", r.agent.c_str(), reached);
    if (kind == AgentKind::QiRL) {
      qirl_median = r.median_episodes_to_90pct();
      for (const auto& s : r.seeds) {
        const double gap = s.metric.oracle_gap.value_or(1.0);
        qirl_gap_worst = std::max(qirl_gap_worst, gap);
        if (gap <= 0.05) ++qirl_within;
      }
    }
    if (kind == AgentKind::QLearningEpsilon) eps_median = r.median_episodes_to_90pct();
  }
  const double t = clock.seconds();
  const bool in_time = t < 600.0;
  report("8a", all_terminal && in_time,
         terminal_detail + fmt("greedy rollouts reaching the terminal, %.1f s", t));
  const bool faster = qirl_median && eps_median && *qirl_median <= *eps_median;
  report("8b", faster && in_time,
         fmt("median episodes_to_90pct: qirl %g, ql_eps %g", qirl_median.value_or(NAN),
             eps_median.value_or(NAN)));
  report("8c", qirl_within == 20 && in_time,
         fmt("qirl seeds within 5%% of the oracle return %.4f: %d/20, worst gap %.3f", oracle,
             qirl_within, qirl_gap_worst));
}

void criterion_9() {
  RunConfig cfg = load_run_config(kConfigDir / "run_10x10.yaml");
  cfg.agent = AgentKind::QiRL;
  cfg.episodes = 300;
  cfg.seeds = {9};
  const GridWorld env(cfg.env);
  const DPResult oracle = dp_optimal(env);
  const double floor = cfg.qirl.p_floor;
  long updates = 0;
  long bad_rows = 0;
  double worst_sum = 0.0;
  double lowest = 1.0;
  train_seed(cfg, env, oracle, 9, [&](const Transition& t, const Agent& agent) {
    ++updates;
    const auto& row = static_cast<const QiRLAgent&>(agent).preferences().row(t.state);
    double sum = 0.0;
    for (double p : row) {
      sum += p;
      lowest = std::min(lowest, p);
      if (p < floor) ++bad_rows;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    if (std::abs(sum - 1.0) > 1e-9) ++bad_rows;
  });
  report("9", updates >= 100000 && bad_rows == 0,
         fmt("%ld updates, max |row sum - 1| %.3g, smallest entry %.3g (floor %g)", updates,
             worst_sum, lowest, floor));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void criterion_10() {
  RunConfig cfg = load_run_config(kConfigDir / "run_10x10.yaml");
  cfg.episodes = 200;
  cfg.seeds = {1, 2, 3, 4};
  const GridWorld env(cfg.env);
  const auto root = std::filesystem::temp_directory_path() / "qirl_acceptance_repro";
  std::filesystem::remove_all(root);
  bool identical = true;
  std::size_t bytes = 0;
  for (AgentKind kind :
       {AgentKind::QiRL, AgentKind::QLearningEpsilon, AgentKind::QLearningBoltzmann}) {
    cfg.agent = kind;
    const auto a = root / (std::string(to_string(kind)) + "_a");
    const auto b = root / (std::string(to_string(kind)) + "_b");
    write_outputs(run(cfg), env, a);
    write_outputs(run(cfg), env, b);
    const std::string first = slurp(a / "episodes.csv");
    identical = identical && !first.empty() && first == slurp(b / "episodes.csv");
    bytes += first.size();
  }
  std::filesystem::remove_all(root);
  report("10", identical,
         fmt("episodes.csv byte-identical across reruns for all agents (%zu bytes compared)",
             bytes));
}

}  // namespace

int main() {
  try {
    criterion_1_and_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
  } catch (const std::exception& e) {
    std::printf("[FAIL] acceptance aborted: %s\n", e.what());
    return 100;
  }
  std::printf("%d criterion line(s) failed\n", failures);
  return failures;
}
