#include "qirl/harness.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qirl/env_file.hpp"

namespace qirl {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::QiRL:
      return "qirl";
    case AgentKind::QLearningEpsilon:
      return "ql_eps";
    case AgentKind::QLearningBoltzmann:
      return "ql_boltz";
  }
  return "?";
}

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "qirl") return AgentKind::QiRL;
  if (name == "ql_eps") return AgentKind::QLearningEpsilon;
  if (name == "ql_boltz") return AgentKind::QLearningBoltzmann;
  throw std::invalid_argument("unknown agent '" + std::string(name) +
                              "' (expected qirl, ql_eps or ql_boltz)");
}

namespace {

[[noreturn]] void config_fail(const std::filesystem::path& path, const YAML::Node& at,
                              const std::string& message) {
  const int line = at.IsDefined() ? at.Mark().line + 1 : 1;
  throw RunConfigError(path.string() + ":" + std::to_string(line) + ": " + message);
}

template <typename T>
T get(const std::filesystem::path& path, const YAML::Node& map, const char* key, T fallback) {
  const YAML::Node n = map[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    config_fail(path, n, std::string("invalid value for '") + key + "'");
  }
}

void only_keys(const std::filesystem::path& path, const YAML::Node& map,
               std::initializer_list<std::string_view> allowed) {
  if (!map.IsMap()) config_fail(path, map, "expected a mapping");
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      config_fail(path, kv.first, "unknown key '" + key + "'");
    }
  }
}

void read_schedule(const std::filesystem::path& path, const YAML::Node& n,
                   ExplorationSchedule& s) {
  if (!n) return;
  only_keys(path, n, {"initial", "decay", "floor"});
  s.initial = get(path, n, "initial", s.initial);
  s.decay = get(path, n, "decay", s.decay);
  s.floor = get(path, n, "floor", s.floor);
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw RunConfigError(path.string() + ": cannot open file");
  std::ostringstream text;
  text << in.rdbuf();

  YAML::Node root;
  try {
    root = YAML::Load(text.str());
  } catch (const YAML::ParserException& e) {
    throw RunConfigError(path.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw RunConfigError(path.string() + ":1: expected a mapping");

  RunConfig cfg;
  if (!root["env_file"]) {
    // A bare environment file: default agent settings.
    cfg.env_file = path;
    cfg.env = parse_env_config(text.str(), path.string());
    return cfg;
  }

  only_keys(path, root,
            {"env_file", "agent", "episodes", "seeds", "output_dir", "threads", "qirl",
             "q_learning", "epsilon_greedy", "boltzmann"});
  const auto env_rel = get<std::string>(path, root, "env_file", "");
  cfg.env_file = path.parent_path() / env_rel;
  if (!std::filesystem::exists(cfg.env_file)) {
    config_fail(path, root["env_file"], "environment file " + cfg.env_file.string() +
                                            " does not exist");
  }
  cfg.env = load_env_file(cfg.env_file);

  if (root["agent"]) {
    try {
      cfg.agent = parse_agent_kind(get<std::string>(path, root, "agent", ""));
    } catch (const std::invalid_argument& e) {
      config_fail(path, root["agent"], e.what());
    }
  }
  cfg.episodes = get(path, root, "episodes", cfg.episodes);
  if (root["seeds"]) cfg.seeds = get<std::vector<std::uint64_t>>(path, root, "seeds", {});
  if (root["output_dir"]) {
    cfg.output_dir = path.parent_path() / get<std::string>(path, root, "output_dir", "out");
  }
  cfg.threads = get(path, root, "threads", cfg.threads);

  if (const YAML::Node q = root["qirl"]) {
    only_keys(path, q, {"alpha", "alpha_decay", "k_plus", "k_minus", "reward_scale",
                        "exponent_clamp", "p_floor"});
    cfg.qirl.alpha.initial = get(path, q, "alpha", cfg.qirl.alpha.initial);
    cfg.qirl.alpha.decay = get(path, q, "alpha_decay", cfg.qirl.alpha.decay);
    cfg.qirl.k_plus = get(path, q, "k_plus", cfg.qirl.k_plus);
    cfg.qirl.k_minus = get(path, q, "k_minus", cfg.qirl.k_minus);
    if (const YAML::Node scale = q["reward_scale"]) {
      if (scale.IsScalar() && scale.Scalar() == "bonus") {
        cfg.reward_scale_is_bonus = true;
      } else {
        cfg.reward_scale_is_bonus = false;
        cfg.qirl.reward_scale = get(path, q, "reward_scale", cfg.qirl.reward_scale);
      }
    }
    cfg.qirl.exponent_clamp = get(path, q, "exponent_clamp", cfg.qirl.exponent_clamp);
    cfg.qirl.p_floor = get(path, q, "p_floor", cfg.qirl.p_floor);
  }
  if (const YAML::Node q = root["q_learning"]) {
    only_keys(path, q, {"alpha", "alpha_decay", "gamma"});
    cfg.ql_alpha.initial = get(path, q, "alpha", cfg.ql_alpha.initial);
    cfg.ql_alpha.decay = get(path, q, "alpha_decay", cfg.ql_alpha.decay);
    cfg.ql_gamma = get(path, q, "gamma", cfg.ql_gamma);
  }
  read_schedule(path, root["epsilon_greedy"], cfg.epsilon);
  read_schedule(path, root["boltzmann"], cfg.boltzmann);

  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw RunConfigError(path.string() + ": " + e.what());
  }
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (cfg.episodes < 1) throw std::invalid_argument("episodes must be at least 1");
  if (cfg.seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (cfg.threads < 0) throw std::invalid_argument("threads must be non-negative");
  validate(cfg.env);
  QiRLConfig q = cfg.qirl;
  if (cfg.reward_scale_is_bonus) q.reward_scale = 1.0;
  validate(q);
  validate(cfg.ql_alpha);
  if (!(cfg.ql_gamma >= 0.0 && cfg.ql_gamma <= 1.0)) {
    throw std::invalid_argument("q_learning gamma must lie in [0, 1]");
  }
  validate(cfg.epsilon);
  validate(cfg.boltzmann);
}

namespace {

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json env;
  const EnvConfig& e = cfg.env;
  env["grid"] = {e.grid.n1, e.grid.n2, e.grid.cell_size_m, e.grid.origin.x, e.grid.origin.y,
                 e.grid.altitude_m};
  env["start"] = {e.start_cell.i, e.start_cell.j};
  env["terminal"] = {e.terminal_cell.i, e.terminal_cell.j};
  env["carrier_freq_hz"] = e.carrier.carrier_freq_hz;
  env["total_bandwidth_hz"] = e.total_bandwidth_hz;
  env["max_steps"] = e.max_steps;
  env["boundary_reward"] = e.boundary_reward;
  auto users = nlohmann::ordered_json::array();
  for (const auto& u : e.users) {
    users.push_back({u.position.x, u.position.y, u.tx_power_w, u.noise_power_w, u.bandwidth_hz});
  }
  env["users"] = users;
  if (e.reward_override) env["cell_rewards"] = *e.reward_override;

  nlohmann::ordered_json j;
  j["env"] = env;
  j["agent"] = std::string(to_string(cfg.agent));
  j["episodes"] = cfg.episodes;
  j["seeds"] = cfg.seeds;
  switch (cfg.agent) {
    case AgentKind::QiRL:
      j["qirl"] = {cfg.qirl.alpha.initial, cfg.qirl.alpha.decay, cfg.qirl.k_plus,
                   cfg.qirl.k_minus, cfg.reward_scale_is_bonus ? -1.0 : cfg.qirl.reward_scale,
                   cfg.qirl.exponent_clamp, cfg.qirl.p_floor};
      break;
    case AgentKind::QLearningEpsilon:
      j["ql"] = {cfg.ql_alpha.initial, cfg.ql_alpha.decay, cfg.ql_gamma, cfg.epsilon.initial,
                 cfg.epsilon.decay, cfg.epsilon.floor};
      break;
    case AgentKind::QLearningBoltzmann:
      j["ql"] = {cfg.ql_alpha.initial, cfg.ql_alpha.decay, cfg.ql_gamma, cfg.boltzmann.initial,
                 cfg.boltzmann.decay, cfg.boltzmann.floor};
      break;
  }
  return j;
}

}  // namespace

std::string config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : to_json(cfg).dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

std::unique_ptr<Agent> make_agent(const RunConfig& cfg, const GridWorld& env) {
  switch (cfg.agent) {
    case AgentKind::QiRL: {
      QiRLConfig q = cfg.qirl;
      if (cfg.reward_scale_is_bonus) q.reward_scale = env.terminal_bonus();
      return std::make_unique<QiRLAgent>(env.num_states(), q);
    }
    case AgentKind::QLearningEpsilon:
      return std::make_unique<QLearningAgent>(env.num_states(), cfg.epsilon, cfg.ql_alpha,
                                              cfg.ql_gamma);
    case AgentKind::QLearningBoltzmann: {
      ExplorationSchedule s = cfg.boltzmann;
      s.initial *= env.terminal_bonus();
      s.floor *= env.terminal_bonus();
      return std::make_unique<QLearningAgent>(env.num_states(), s, cfg.ql_alpha, cfg.ql_gamma);
    }
  }
  throw std::logic_error("unhandled agent kind");
}

EpisodeLog run_episode(const GridWorld& env, Agent& agent, SplitMix64& rng, int episode,
                       const StepObserver& observer, std::vector<Action>* actions) {
  EpisodeLog log;
  log.episode = episode + 1;
  StateId s = env.start();
  while (log.steps < env.max_steps()) {
    const Action a = agent.select(s, episode, rng);
    const StepOutcome o = env.step(s, a);
    const bool out_of_budget = !o.terminal && log.steps + 1 == env.max_steps();
    const Transition t{s, a, o.reward, o.next_state, o.boundary_hit, o.terminal, out_of_budget};
    agent.learn(t, episode);
    if (observer) observer(t, agent);
    if (actions) actions->push_back(a);
    log.episode_return += o.reward;
    ++log.steps;
    s = o.next_state;
    if (o.terminal) {
      log.reached_terminal = true;
      break;
    }
  }
  return log;
}

double replay_return(const GridWorld& env, std::span<const Action> actions) {
  double total = 0.0;
  StateId s = env.start();
  for (Action a : actions) {
    const StepOutcome o = env.step(s, a);
    total += o.reward;
    s = o.next_state;
  }
  return total;
}

ConvergenceMetric convergence_metrics(std::span<const double> returns, const DPResult& oracle,
                                      double greedy_return, int window) {
  ConvergenceMetric m;
  if (oracle.feasible && oracle.optimal_return != 0.0) {
    m.oracle_gap = (oracle.optimal_return - greedy_return) / oracle.optimal_return;
  }
  const auto w = static_cast<std::size_t>(window);
  if (window < 1 || returns.size() < w) return m;

  std::vector<double> moving;
  moving.reserve(returns.size() - w + 1);
  for (std::size_t end = w; end <= returns.size(); ++end) {
    double sum = 0.0;
    for (std::size_t k = end - w; k < end; ++k) sum += returns[k];
    moving.push_back(sum / static_cast<double>(w));
  }
  m.final_return_mean = moving.back();
  const double threshold = 0.9 * moving.back();
  for (std::size_t k = 0; k < moving.size(); ++k) {
    if (moving[k] >= threshold) {
      m.episodes_to_90pct = static_cast<int>(k + w);
      break;
    }
  }
  return m;
}

ConvergenceMetric convergence_metrics(std::span<const EpisodeLog> logs, const DPResult& oracle,
                                      double greedy_return, int window) {
  std::vector<double> returns;
  returns.reserve(logs.size());
  for (const auto& l : logs) returns.push_back(l.episode_return);
  return convergence_metrics(returns, oracle, greedy_return, window);
}

std::optional<double> RunResult::median_episodes_to_90pct() const {
  std::vector<double> values;
  for (const auto& s : seeds) {
    if (s.metric.episodes_to_90pct) values.push_back(*s.metric.episodes_to_90pct);
  }
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

SeedResult train_seed(const RunConfig& cfg, const GridWorld& env, const DPResult& oracle,
                      std::uint64_t seed, const StepObserver& observer) {
  constexpr int kSpotCheckEvery = 100;
  SeedResult out;
  out.seed = seed;
  SplitMix64 rng(seed);
  const auto agent = make_agent(cfg, env);
  out.episodes.reserve(static_cast<std::size_t>(cfg.episodes));
  std::vector<Action> actions;
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    const bool spot_check = ep % kSpotCheckEvery == 0;
    actions.clear();
    EpisodeLog log = run_episode(env, *agent, rng, ep, observer, spot_check ? &actions : nullptr);
    log.seed = seed;
    if (spot_check && replay_return(env, actions) != log.episode_return) {
      throw std::logic_error("episode " + std::to_string(log.episode) +
                             " return disagrees with its replay");
    }
    out.episodes.push_back(log);
  }
  out.greedy = agent->greedy(env);
  out.metric = convergence_metrics(out.episodes, oracle, out.greedy.total_return);
  if (oracle.feasible) {
    const double slack = 1e-9 * std::max(1.0, std::abs(oracle.optimal_return));
    out.within_oracle_bound = out.greedy.total_return <= oracle.optimal_return + slack;
  }
  return out;
}

RunResult run(const RunConfig& cfg) {
  validate(cfg);
  const GridWorld env(cfg.env);
  RunResult result;
  result.agent = std::string(to_string(cfg.agent));
  result.config_hash = config_hash(cfg);
  result.oracle = dp_optimal(env);
  result.seeds.resize(cfg.seeds.size());

  const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
  const auto workers = std::min<std::size_t>(
      cfg.threads > 0 ? static_cast<std::size_t>(cfg.threads) : hw, cfg.seeds.size());
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < cfg.seeds.size(); k = next++) {
          try {
            result.seeds[k] = train_seed(cfg, env, result.oracle, cfg.seeds[k]);
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<TrajectoryRow> trajectory_rows(std::uint64_t seed, const Rollout& rollout,
                                           const GridWorld& env) {
  std::vector<TrajectoryRow> rows;
  rows.reserve(rollout.states.size());
  for (std::size_t k = 0; k < rollout.states.size(); ++k) {
    const StateId s = rollout.states[k];
    const Cell c = env.cell_of(s);
    const Position3 p = env.cell_center(s);
    rows.push_back({seed, static_cast<int>(k), c.i, c.j, p.x, p.y,
                    k == 0 ? 0.0 : rollout.rewards[k - 1]});
  }
  return rows;
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
T parse_field(std::string_view text, int line_no) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad field '" +
                             std::string(text) + "'");
  }
  return value;
}

std::vector<std::vector<std::string_view>> read_rows(std::istream& in, std::string_view header,
                                                     std::vector<std::string>& storage) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw std::runtime_error("csv header mismatch, expected '" + std::string(header) + "'");
  }
  while (std::getline(in, line)) {
    if (!line.empty()) storage.push_back(line);
  }
  std::vector<std::vector<std::string_view>> rows;
  for (const auto& l : storage) rows.push_back(split(l));
  return rows;
}

constexpr std::string_view kEpisodesHeader = "seed,episode,return,steps,reached_terminal";
constexpr std::string_view kTrajectoryHeader = "seed,step,cell_i,cell_j,x_m,y_m,reward";

}  // namespace

void write_episodes_csv(std::ostream& out, std::span<const EpisodeLog> logs) {
  out << kEpisodesHeader << '\n';
  for (const auto& l : logs) {
    out << l.seed << ',' << l.episode << ',' << format_double(l.episode_return) << ','
        << l.steps << ',' << (l.reached_terminal ? 1 : 0) << '\n';
  }
}

std::vector<EpisodeLog> read_episodes_csv(std::istream& in) {
  std::vector<std::string> storage;
  const auto rows = read_rows(in, kEpisodesHeader, storage);
  std::vector<EpisodeLog> logs;
  int line_no = 1;
  for (const auto& f : rows) {
    ++line_no;
    if (f.size() != 5) throw std::runtime_error("csv line " + std::to_string(line_no) +
                                                ": expected 5 fields");
    logs.push_back({parse_field<std::uint64_t>(f[0], line_no), parse_field<int>(f[1], line_no),
                    parse_field<double>(f[2], line_no), parse_field<int>(f[3], line_no),
                    parse_field<int>(f[4], line_no) != 0});
  }
  return logs;
}

void write_trajectory_csv(std::ostream& out, std::span<const TrajectoryRow> rows) {
  out << kTrajectoryHeader << '\n';
  for (const auto& r : rows) {
    out << r.seed << ',' << r.step << ',' << r.cell_i << ',' << r.cell_j << ','
        << format_double(r.x_m) << ',' << format_double(r.y_m) << ',' << format_double(r.reward)
        << '\n';
  }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in) {
  std::vector<std::string> storage;
  const auto rows = read_rows(in, kTrajectoryHeader, storage);
  std::vector<TrajectoryRow> out;
  int line_no = 1;
  for (const auto& f : rows) {
    ++line_no;
    if (f.size() != 7) throw std::runtime_error("csv line " + std::to_string(line_no) +
                                                ": expected 7 fields");
    out.push_back({parse_field<std::uint64_t>(f[0], line_no), parse_field<int>(f[1], line_no),
                   parse_field<int>(f[2], line_no), parse_field<int>(f[3], line_no),
                   parse_field<double>(f[4], line_no), parse_field<double>(f[5], line_no),
                   parse_field<double>(f[6], line_no)});
  }
  return out;
}

void write_outputs(const RunResult& result, const GridWorld& env,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto open = [&dir](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };

  {
    std::ofstream f = open("episodes.csv");
    std::vector<EpisodeLog> all;
    for (const auto& s : result.seeds) all.insert(all.end(), s.episodes.begin(), s.episodes.end());
    write_episodes_csv(f, all);
  }
  {
    std::ofstream f = open("trajectory.csv");
    std::vector<TrajectoryRow> all;
    for (const auto& s : result.seeds) {
      const auto rows = trajectory_rows(s.seed, s.greedy, env);
      all.insert(all.end(), rows.begin(), rows.end());
    }
    write_trajectory_csv(f, all);
  }

  nlohmann::ordered_json j;
  j["agent"] = result.agent;
  j["config_hash"] = result.config_hash;
  j["oracle_return"] = result.oracle.optimal_return;
  j["oracle_feasible"] = result.oracle.feasible;
  j["oracle_steps"] = result.oracle.horizon_used;
  j["terminal_bonus"] = env.terminal_bonus();
  const auto opt = [](const auto& v) -> nlohmann::ordered_json {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  auto seeds = nlohmann::ordered_json::array();
  for (const auto& s : result.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["episodes_to_90pct"] = opt(s.metric.episodes_to_90pct);
    e["final_return_mean"] = opt(s.metric.final_return_mean);
    e["oracle_gap"] = opt(s.metric.oracle_gap);
    e["greedy_return"] = s.greedy.total_return;
    e["greedy_mean_reward"] = s.greedy.mean_reward();
    e["greedy_steps"] = s.greedy.steps;
    e["greedy_reached_terminal"] = s.greedy.reached_terminal;
    e["greedy_revisited"] = s.greedy.revisited;
    e["greedy_tie_broken"] = s.greedy.tie_broken;
    e["within_oracle_bound"] = s.within_oracle_bound;
    seeds.push_back(e);
  }
  j["seeds"] = seeds;
  j["median_episodes_to_90pct"] = opt(result.median_episodes_to_90pct());
  std::ofstream f = open("summary.json");
  f << j.dump(2) << '\n';
}

std::vector<StoredSeedMetrics> metrics_from_outputs(const std::filesystem::path& dir) {
  const auto open = [&dir](const char* name) {
    std::ifstream f(dir / name, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + (dir / name).string());
    return f;
  };
  std::ifstream summary_file = open("summary.json");
  const auto summary = nlohmann::json::parse(summary_file);
  DPResult oracle;
  oracle.feasible = summary.at("oracle_feasible").get<bool>();
  oracle.optimal_return = summary.at("oracle_return").get<double>();

  std::ifstream episodes_file = open("episodes.csv");
  const auto logs = read_episodes_csv(episodes_file);
  std::ifstream trajectory_file = open("trajectory.csv");
  const auto rows = read_trajectory_csv(trajectory_file);

  std::vector<StoredSeedMetrics> out;
  for (const auto& entry : summary.at("seeds")) {
    StoredSeedMetrics m;
    m.seed = entry.at("seed").get<std::uint64_t>();
    std::vector<EpisodeLog> mine;
    std::copy_if(logs.begin(), logs.end(), std::back_inserter(mine),
                 [&m](const EpisodeLog& l) { return l.seed == m.seed; });
    for (const auto& r : rows) {
      if (r.seed == m.seed) m.greedy_return += r.reward;
    }
    m.episodes = static_cast<int>(mine.size());
    m.metric = convergence_metrics(mine, oracle, m.greedy_return);
    out.push_back(m);
  }
  return out;
}

}  // namespace qirl
