#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qirl/agents.hpp"
#include "qirl/channel.hpp"
#include "qirl/env_file.hpp"
#include "qirl/gridworld.hpp"
#include "qirl/harness.hpp"
#include "qirl/oracle.hpp"
#include "qirl/quantum.hpp"

namespace py = pybind11;
using namespace qirl;

namespace {

using Triple = std::tuple<double, double, double>;

Position3 to_position(const Triple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }
Triple to_tuple(const Position3& p) { return {p.x, p.y, p.z}; }

Amplitudes to_amplitudes(const std::vector<Complex>& v) {
  if (v.size() != kRegisterSize) throw std::invalid_argument("a register has 4 amplitudes");
  Amplitudes a;
  std::copy(v.begin(), v.end(), a.begin());
  return a;
}

py::array_t<Complex> to_array(const AmplitudeRegister& reg) {
  py::array_t<Complex> out(kRegisterSize);
  std::copy(reg.amplitudes().begin(), reg.amplitudes().end(), out.mutable_data());
  return out;
}

std::vector<std::uint32_t> ids(const std::vector<StateId>& path) {
  std::vector<std::uint32_t> out;
  for (auto s : path) out.push_back(s.value);
  return out;
}

py::dict metric_dict(const ConvergenceMetric& m) {
  py::dict d;
  d["episodes_to_90pct"] = m.episodes_to_90pct;
  d["final_return_mean"] = m.final_return_mean;
  d["oracle_gap"] = m.oracle_gap;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the qirl package";

  // channel
  py::class_<CarrierConfig>(m, "CarrierConfig")
      .def(py::init([](double f) { return CarrierConfig{f}; }), py::arg("carrier_freq_hz") = 2e9)
      .def_readwrite("carrier_freq_hz", &CarrierConfig::carrier_freq_hz);

  py::class_<GroundUser>(m, "GroundUser")
      .def(py::init([](double x, double y, double p, double noise, double bw) {
             GroundUser u{{x, y, 0.0}, p, noise, bw};
             validate(u);
             return u;
           }),
           py::arg("x_m"), py::arg("y_m"), py::arg("tx_power_w") = 1.0,
           py::arg("noise_power_w") = 1.0, py::arg("bandwidth_hz") = 2e6)
      .def_property_readonly("position", [](const GroundUser& u) { return to_tuple(u.position); })
      .def_readwrite("tx_power_w", &GroundUser::tx_power_w)
      .def_readwrite("noise_power_w", &GroundUser::noise_power_w)
      .def_readwrite("bandwidth_hz", &GroundUser::bandwidth_hz);

  m.def("path_loss_db",
        [](double d, double f) { return path_loss_db(d, CarrierConfig{f}); },
        py::arg("distance_m"), py::arg("carrier_freq_hz") = 2e9);
  m.def("snr",
        [](double pl, double p, double noise) {
          GroundUser u;
          u.tx_power_w = p;
          u.noise_power_w = noise;
          return snr(pl, u);
        },
        py::arg("path_loss_db"), py::arg("tx_power_w") = 1.0, py::arg("noise_power_w") = 1.0);
  m.def("sum_rate",
        [](const Triple& uav, const std::vector<GroundUser>& users, double f) {
          return sum_rate(to_position(uav), users, CarrierConfig{f});
        },
        py::arg("uav"), py::arg("users"), py::arg("carrier_freq_hz") = 2e9);

  // gridworld
  py::enum_<Action>(m, "Action")
      .value("Forward", Action::Forward)
      .value("Backward", Action::Backward)
      .value("Left", Action::Left)
      .value("Right", Action::Right);

  py::class_<Cell>(m, "Cell")
      .def(py::init([](int i, int j) { return Cell{i, j}; }), py::arg("i"), py::arg("j"))
      .def_readwrite("i", &Cell::i)
      .def_readwrite("j", &Cell::j)
      .def("__eq__", [](const Cell& a, const Cell& b) { return a == b; })
      .def("__repr__",
           [](const Cell& c) { return "Cell(" + std::to_string(c.i) + ", " + std::to_string(c.j) + ")"; });

  py::class_<EnvConfig>(m, "EnvConfig")
      .def_readwrite("max_steps", &EnvConfig::max_steps)
      .def_readwrite("start_cell", &EnvConfig::start_cell)
      .def_readwrite("terminal_cell", &EnvConfig::terminal_cell)
      .def_readwrite("users", &EnvConfig::users)
      .def_readwrite("boundary_reward", &EnvConfig::boundary_reward)
      .def_readwrite("reward_override", &EnvConfig::reward_override)
      .def_property_readonly("shape",
                             [](const EnvConfig& c) { return std::pair{c.grid.n1, c.grid.n2}; });

  m.def("load_env_file", &load_env_file, py::arg("path"));
  m.def("synthetic_config", &synthetic_config, py::arg("n1"), py::arg("n2"), py::arg("start"),
        py::arg("terminal"), py::arg("max_steps"), py::arg("cell_reward") = 1.0);

  py::class_<GridWorld>(m, "GridWorld")
      .def(py::init<EnvConfig>(), py::arg("config"))
      .def_property_readonly("n1", &GridWorld::n1)
      .def_property_readonly("n2", &GridWorld::n2)
      .def_property_readonly("num_states", &GridWorld::num_states)
      .def_property_readonly("max_steps", &GridWorld::max_steps)
      .def_property_readonly("start", [](const GridWorld& g) { return g.start().value; })
      .def_property_readonly("terminal", [](const GridWorld& g) { return g.terminal().value; })
      .def_property_readonly("terminal_bonus", &GridWorld::terminal_bonus)
      .def_property_readonly("reward_table",
                             [](const GridWorld& g) {
                               const auto t = g.reward_table();
                               return py::array_t<double>(t.size(), t.data());
                             })
      .def("state_of", [](const GridWorld& g, int i, int j) { return g.state_of({i, j}).value; })
      .def("cell_of", [](const GridWorld& g, std::uint32_t s) { return g.cell_of({s}); })
      .def("cell_center",
           [](const GridWorld& g, std::uint32_t s) { return to_tuple(g.cell_center({s})); })
      .def("step", [](const GridWorld& g, std::uint32_t s, Action a) {
        const StepOutcome o = g.step({s}, a);
        py::dict d;
        d["next_state"] = o.next_state.value;
        d["reward"] = o.reward;
        d["boundary_hit"] = o.boundary_hit;
        d["terminal"] = o.terminal;
        return d;
      });

  // quantum
  py::class_<SplitMix64>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("next", [](SplitMix64& r) { return r(); })
      .def("uniform", &SplitMix64::uniform);

  py::class_<AmplitudeRegister>(m, "AmplitudeRegister")
      .def(py::init([](const std::vector<Complex>& v) { return AmplitudeRegister(to_amplitudes(v)); }),
           py::arg("amplitudes"))
      .def_static("uniform", &AmplitudeRegister::uniform)
      .def_static("normalized",
                  [](const std::vector<Complex>& v) {
                    return AmplitudeRegister::normalized(to_amplitudes(v));
                  })
      .def_property_readonly("amplitudes", &to_array)
      .def_property_readonly("probabilities", &AmplitudeRegister::probabilities)
      .def("norm", &AmplitudeRegister::norm);

  m.def("collapse", &collapse, py::arg("register"), py::arg("rng"));
  m.def("grover_matrix",
        [](const AmplitudeRegister& r, std::size_t target, double phi1, double phi2) {
          return grover_matrix(r, target, PhasePair(phi1, phi2));
        },
        py::arg("register"), py::arg("target"), py::arg("phi1"), py::arg("phi2"));
  m.def("grover_analytic",
        [](const AmplitudeRegister& r, std::size_t target, double phi1, double phi2) {
          return grover_analytic(r, target, PhasePair(phi1, phi2));
        },
        py::arg("register"), py::arg("target"), py::arg("phi1"), py::arg("phi2"));
  m.def("amplitude_ratio",
        [](double phi1, double phi2, double p) { return amplitude_ratio(PhasePair(phi1, phi2), p); },
        py::arg("phi1"), py::arg("phi2"), py::arg("p_target"));

  // agents
  py::class_<QiRLConfig>(m, "QiRLConfig")
      .def(py::init<>())
      .def_property(
          "alpha", [](const QiRLConfig& c) { return c.alpha.initial; },
          [](QiRLConfig& c, double a) { c.alpha.initial = a; })
      .def_readwrite("k_plus", &QiRLConfig::k_plus)
      .def_readwrite("k_minus", &QiRLConfig::k_minus)
      .def_readwrite("reward_scale", &QiRLConfig::reward_scale)
      .def_readwrite("exponent_clamp", &QiRLConfig::exponent_clamp)
      .def_readwrite("p_floor", &QiRLConfig::p_floor);

  // Works on copies: takes the state values and the 4-entry preference row of
  // the visited state, returns (new value, new row, td_error).
  m.def("qirl_update",
        [](double v_s, double v_next, std::array<double, kRegisterSize> row, Action a, double r,
           bool boundary_hit, bool terminal, const QiRLConfig& cfg) {
          validate(cfg);
          ValueTable v(2);
          ActionPreferenceTable prefs(2);
          v[StateId{0}] = v_s;
          v[StateId{1}] = v_next;
          prefs.row(StateId{0}) = row;
          Transition t{StateId{0}, a, r, StateId{1}, boundary_hit, terminal, false};
          const QiRLUpdate u = qirl_update(v, prefs, t, cfg);
          return py::make_tuple(v[StateId{0}], prefs.row(StateId{0}), u.td_error);
        },
        py::arg("v_s"), py::arg("v_next"), py::arg("row"), py::arg("action"), py::arg("reward"),
        py::arg("boundary_hit"), py::arg("terminal"), py::arg("config"));

  // oracle
  m.def("dp_optimal", [](const GridWorld& env) {
    const DPResult r = dp_optimal(env);
    py::dict d;
    d["feasible"] = r.feasible;
    d["optimal_return"] = r.optimal_return;
    d["path"] = ids(r.optimal_path);
    d["steps"] = r.horizon_used;
    return d;
  });
  m.def("enumerate_paths", [](const GridWorld& env, int max_len) {
    const EnumerationResult r = enumerate_paths(env, max_len);
    py::dict d;
    d["feasible"] = r.feasible;
    d["best_return"] = r.best_return;
    d["path"] = ids(r.best_path);
    d["sequences"] = r.sequences;
    return d;
  });

  // harness
  py::enum_<AgentKind>(m, "AgentKind")
      .value("QiRL", AgentKind::QiRL)
      .value("QLearningEpsilon", AgentKind::QLearningEpsilon)
      .value("QLearningBoltzmann", AgentKind::QLearningBoltzmann);

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("env", &RunConfig::env)
      .def_property(
          "agent", [](const RunConfig& c) { return std::string(to_string(c.agent)); },
          [](RunConfig& c, const std::string& name) { c.agent = parse_agent_kind(name); })
      .def_readwrite("episodes", &RunConfig::episodes)
      .def_readwrite("seeds", &RunConfig::seeds)
      .def_readwrite("output_dir", &RunConfig::output_dir)
      .def_readwrite("threads", &RunConfig::threads)
      .def_readwrite("qirl", &RunConfig::qirl)
      .def("config_hash", &config_hash);

  m.def("load_run_config", &load_run_config, py::arg("path"));

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("agent", &RunResult::agent)
      .def_readonly("config_hash", &RunResult::config_hash)
      .def_property_readonly("oracle_return",
                             [](const RunResult& r) { return r.oracle.optimal_return; })
      .def_property_readonly("median_episodes_to_90pct", &RunResult::median_episodes_to_90pct)
      .def_property_readonly("seeds", [](const RunResult& r) {
        py::list out;
        for (const auto& s : r.seeds) {
          py::dict d = metric_dict(s.metric);
          d["seed"] = s.seed;
          std::vector<double> returns;
          for (const auto& e : s.episodes) returns.push_back(e.episode_return);
          d["returns"] = returns;
          d["greedy_return"] = s.greedy.total_return;
          d["greedy_path"] = ids(s.greedy.states);
          d["greedy_reached_terminal"] = s.greedy.reached_terminal;
          out.append(d);
        }
        return out;
      });

  m.def("run",
        [](const RunConfig& cfg) {
          py::gil_scoped_release release;
          return run(cfg);
        },
        py::arg("config"));
  m.def("write_outputs",
        [](const RunResult& result, const RunConfig& cfg, const std::filesystem::path& dir) {
          write_outputs(result, GridWorld(cfg.env), dir);
        },
        py::arg("result"), py::arg("config"), py::arg("directory"));
  m.def("convergence_metrics",
        [](const std::vector<double>& returns, double oracle_return, double greedy_return,
           int window) {
          DPResult oracle;
          oracle.feasible = true;
          oracle.optimal_return = oracle_return;
          return metric_dict(convergence_metrics(returns, oracle, greedy_return, window));
        },
        py::arg("returns"), py::arg("oracle_return"), py::arg("greedy_return"),
        py::arg("window") = kMovingAverageWindow);
}
