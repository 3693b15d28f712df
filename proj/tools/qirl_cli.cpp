// qirl: train agents, solve the oracle and summarize stored runs.
//
//   qirl run --config <file> [--agent <name>] [--episodes <n>] [--seeds <list>] [--out <dir>]
//   qirl oracle --config <file>
//   qirl metrics --in <dir>
//
// Exit codes: 0 success, 1 configuration error, 2 runtime error.

#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "qirl/env_file.hpp"
#include "qirl/harness.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

std::uint64_t parse_u64(std::string_view text) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw UsageError("bad seed '" + std::string(text) + "'");
  }
  return v;
}

// "1,2,5" or "1-20" or a mix such as "1-3,7".
std::vector<std::uint64_t> parse_seeds(const std::string& spec) {
  std::vector<std::uint64_t> seeds;
  std::string_view rest = spec;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto dash = item.find('-');
    if (dash == std::string_view::npos) {
      seeds.push_back(parse_u64(item));
      continue;
    }
    const auto lo = parse_u64(item.substr(0, dash));
    const auto hi = parse_u64(item.substr(dash + 1));
    if (hi < lo) throw UsageError("empty seed range '" + std::string(item) + "'");
    for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw UsageError("no seeds given");
  return seeds;
}

std::string path_text(const qirl::GridWorld& env, const std::vector<qirl::StateId>& path) {
  std::string out;
  for (const auto s : path) {
    const auto c = env.cell_of(s);
    if (!out.empty()) out += ' ';
    out += "(" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
  }
  return out;
}

int cmd_run(const std::string& config_path, const std::string& agent, int episodes,
            const std::string& seeds, const std::string& out_dir) {
  qirl::RunConfig cfg = qirl::load_run_config(config_path);
  if (!agent.empty()) cfg.agent = qirl::parse_agent_kind(agent);
  if (episodes > 0) cfg.episodes = episodes;
  if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
  if (!out_dir.empty()) cfg.output_dir = out_dir;
  qirl::validate(cfg);

  const qirl::GridWorld env(cfg.env);
  const qirl::RunResult result = qirl::run(cfg);
  qirl::write_outputs(result, env, cfg.output_dir);

  std::cout << "agent " << result.agent << ", " << result.seeds.size() << " seed(s), "
            << cfg.episodes << " episodes, config " << result.config_hash << '\n';
  std::cout << "oracle return " << result.oracle.optimal_return << '\n';
  for (const auto& s : result.seeds) {
    std::cout << "  seed " << s.seed << ": greedy return " << s.greedy.total_return
              << (s.greedy.reached_terminal ? " (terminal)" : " (no terminal)");
    if (s.metric.oracle_gap) std::cout << ", oracle gap " << *s.metric.oracle_gap;
    if (s.metric.episodes_to_90pct) {
      std::cout << ", episodes to 90% " << *s.metric.episodes_to_90pct;
    }
    std::cout << '\n';
  }
  std::cout << "wrote " << cfg.output_dir.string() << '\n';
  return 0;
}

int cmd_oracle(const std::string& config_path) {
  const qirl::RunConfig cfg = qirl::load_run_config(config_path);
  const qirl::GridWorld env(cfg.env);
  const qirl::DPResult dp = qirl::dp_optimal(env);
  nlohmann::ordered_json j;
  j["feasible"] = dp.feasible;
  j["optimal_return"] = dp.optimal_return;
  j["steps"] = dp.horizon_used;
  j["terminal_bonus"] = env.terminal_bonus();
  j["path"] = path_text(env, dp.optimal_path);
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_metrics(const std::string& dir) {
  const auto metrics = qirl::metrics_from_outputs(dir);
  const auto show = [](const auto& v) { return v ? qirl::format_double(*v) : std::string("-"); };
  std::cout << "seed,episodes,episodes_to_90pct,final_return_mean,oracle_gap,greedy_return\n";
  for (const auto& m : metrics) {
    std::cout << m.seed << ',' << m.episodes << ',' << show(m.metric.episodes_to_90pct) << ','
              << show(m.metric.final_return_mean) << ',' << show(m.metric.oracle_gap) << ','
              << qirl::format_double(m.greedy_return) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-inspired RL for UAV trajectory planning"};
  app.require_subcommand(1);

  std::string config_path, agent, seeds, out_dir, in_dir;
  int episodes = 0;

  auto* run = app.add_subcommand("run", "train an agent over one or more seeds");
  run->add_option("--config", config_path, "run config or environment file")->required();
  run->add_option("--agent", agent, "qirl, ql_eps or ql_boltz");
  run->add_option("--episodes", episodes, "training episodes per seed");
  run->add_option("--seeds", seeds, "seed list, e.g. 1,2,3 or 1-20");
  run->add_option("--out", out_dir, "output directory");

  auto* oracle = app.add_subcommand("oracle", "solve the environment exactly");
  oracle->add_option("--config", config_path, "run config or environment file")->required();

  auto* metrics = app.add_subcommand("metrics", "recompute convergence metrics of a run");
  metrics->add_option("--in", in_dir, "directory written by `run`")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return cmd_run(config_path, agent, episodes, seeds, out_dir);
    if (*oracle) return cmd_oracle(config_path);
    return cmd_metrics(in_dir);
  } catch (const qirl::EnvFileError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qirl::RunConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
