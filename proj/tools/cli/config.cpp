#include "config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qcal/errors.hpp"
#include "qcal/rng.hpp"

namespace qcal::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a number, got '" + value + "'");
  }
  return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  // accept plain integers and exact scientific forms such as 2e5
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec == std::errc() && ptr == value.data() + value.size()) return out;
  const double d = parse_double(key, value);
  if (d < 0.0 || d != std::floor(d) || d > 9.0e15) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  if (out.empty()) throw ConfigError(key + ": empty list");
  return out;
}

fs::path existing_file(const std::string& key, const std::string& value, const fs::path& base) {
  fs::path p(value);
  if (p.is_relative()) p = base / p;
  if (!fs::is_regular_file(p)) throw ConfigError(key + ": file not found: " + p.string());
  return p;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

const std::set<std::string>& known_tasks() {
  static const std::set<std::string> names{"hadamard", "cnot", "tx", "ty", "bitflip", "bell", "custom"};
  return names;
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  RunConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters{
      {"task", [&](auto& k, auto& v) {
         if (!known_tasks().contains(v)) throw ConfigError(k + ": unknown task '" + v + "'");
         cfg.task = v;
       }},
      {"variant", [&](auto&, auto& v) { cfg.variant = AgentVariant::parse(v); }},
      {"seed", [&](auto& k, auto& v) { cfg.seed = parse_count(k, v); }},
      {"output_dir", [&](auto&, auto& v) { cfg.output_dir = v; }},
      {"episodes", [&](auto& k, auto& v) { cfg.hp.episodes = parse_count(k, v); }},
      {"learning_rate", [&](auto& k, auto& v) { cfg.hp.learning_rate = parse_double(k, v); }},
      {"discount", [&](auto& k, auto& v) { cfg.hp.discount = parse_double(k, v); }},
      {"hidden_units", [&](auto& k, auto& v) { cfg.hp.hidden_units = parse_count(k, v); }},
      {"memory_capacity_transitions",
       [&](auto& k, auto& v) { cfg.hp.memory_capacity = parse_count(k, v); }},
      {"minibatch_size", [&](auto& k, auto& v) { cfg.hp.minibatch_size = parse_count(k, v); }},
      {"train_every_steps", [&](auto& k, auto& v) { cfg.hp.train_every_steps = parse_count(k, v); }},
      {"target_update_every_episodes",
       [&](auto& k, auto& v) { cfg.hp.target_update_every_episodes = parse_count(k, v); }},
      {"epsilon_step_per_episode",
       [&](auto& k, auto& v) { cfg.hp.epsilon_step = parse_double(k, v); }},
      {"state_normalization",
       [&](auto& k, auto& v) { cfg.hp.state_normalization = parse_double(k, v); }},
      {"best_reinject_every_episodes",
       [&](auto& k, auto& v) { cfg.hp.best_reinject_every_episodes = parse_count(k, v); }},
      {"activation", [&](auto&, auto& v) { cfg.hp.activation = parse_activation(v); }},
      {"momentum", [&](auto& k, auto& v) { cfg.hp.momentum = parse_double(k, v); }},
      {"gradient_clip", [&](auto& k, auto& v) {
         if (v == "none") {
           cfg.hp.gradient_clip.reset();
         } else {
           cfg.hp.gradient_clip = parse_double(k, v);
         }
       }},
      {"reward_log_base", [&](auto& k, auto& v) {
         if (v == "e") {
           cfg.hp.reward_log_base = LogBase::Natural;
         } else if (v == "10") {
           cfg.hp.reward_log_base = LogBase::Ten;
         } else {
           throw ConfigError(k + ": expected 'e' or '10'");
         }
       }},
      {"transition_labeling", [&](auto&, auto& v) { cfg.hp.labeling = parse_labeling(v); }},
      {"horizon_steps", [&](auto& k, auto& v) { cfg.horizon_steps = parse_count(k, v); }},
      {"total_time", [&](auto& k, auto& v) { cfg.total_time = parse_double(k, v); }},
      {"training_states_file",
       [&](auto& k, auto& v) { cfg.training_states_file = existing_file(k, v, base_dir); }},
      {"test_states_file",
       [&](auto& k, auto& v) { cfg.test_states_file = existing_file(k, v, base_dir); }},
      {"training_state_count",
       [&](auto& k, auto& v) { cfg.training_state_count = parse_count(k, v); }},
      {"test_state_count", [&](auto& k, auto& v) { cfg.test_state_count = parse_count(k, v); }},
      {"testing_pulse_duration",
       [&](auto& k, auto& v) { cfg.testing_pulse_duration = parse_double(k, v); }},
      {"testing_control_sampling", [&](auto& k, auto& v) {
         if (v == "continuous") {
           cfg.testing_control_sampling = ControlSampling::Continuous;
         } else if (v == "two_point") {
           cfg.testing_control_sampling = ControlSampling::TwoPoint;
         } else {
           throw ConfigError(k + ": expected 'continuous' or 'two_point'");
         }
       }},
      {"custom_kind", [&](auto& k, auto& v) {
         if (v != "gate_design" && v != "composed") {
           throw ConfigError(k + ": expected 'gate_design' or 'composed'");
         }
         cfg.custom_kind = v;
       }},
      {"custom_hamiltonian", [&](auto& k, auto& v) {
         if (v != "single" && v != "two") throw ConfigError(k + ": expected 'single' or 'two'");
         cfg.custom_hamiltonian = v;
       }},
      {"custom_target", [&](auto&, auto& v) { cfg.custom_target = v; }},
      {"custom_fixed_u0", [&](auto& k, auto& v) {
         if (v == "none") {
           cfg.custom_fixed_u0.reset();
         } else {
           cfg.custom_fixed_u0 = parse_double(k, v);
         }
       }},
      {"custom_control_values",
       [&](auto& k, auto& v) { cfg.custom_control_values = parse_list(k, v); }},
  };

  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(content.substr(0, eq));
    const std::string value = trim(content.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");
    try {
      it->second(key, value);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(key + ": " + e.what());
    }
  }
  cfg.hp.validate();
  if (cfg.horizon_steps && *cfg.horizon_steps == 0) throw ConfigError("horizon_steps must be >= 1");
  if (cfg.total_time && !(*cfg.total_time > 0.0)) throw ConfigError("total_time must be positive");
  if (!(cfg.testing_pulse_duration > 0.0)) throw ConfigError("testing_pulse_duration must be positive");
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path().empty() ? fs::current_path() : path.parent_path());
}

std::string render_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  const HyperParams& hp = cfg.hp;
  out << "task = " << cfg.task << "\n"
      << "variant = " << cfg.variant.name() << "\n"
      << "seed = " << cfg.seed << "\n"
      << "episodes = " << hp.episodes << "\n"
      << "learning_rate = " << format_double(hp.learning_rate) << "\n"
      << "discount = " << format_double(hp.discount) << "\n"
      << "hidden_units = " << hp.hidden_units << "\n"
      << "memory_capacity_transitions = " << hp.memory_capacity << "\n"
      << "minibatch_size = " << hp.minibatch_size << "\n"
      << "train_every_steps = " << hp.train_every_steps << "\n"
      << "target_update_every_episodes = " << hp.target_update_every_episodes << "\n"
      << "epsilon_step_per_episode = " << format_double(hp.epsilon_step) << "\n"
      << "state_normalization = " << format_double(hp.state_normalization) << "\n"
      << "best_reinject_every_episodes = " << hp.best_reinject_every_episodes << "\n"
      << "activation = " << to_string(hp.activation) << "\n"
      << "momentum = " << format_double(hp.momentum) << "\n"
      << "gradient_clip = " << (hp.gradient_clip ? format_double(*hp.gradient_clip) : "none") << "\n"
      << "reward_log_base = " << (hp.reward_log_base == LogBase::Natural ? "e" : "10") << "\n"
      << "transition_labeling = " << to_string(hp.labeling) << "\n";
  if (cfg.horizon_steps) out << "horizon_steps = " << *cfg.horizon_steps << "\n";
  if (cfg.total_time) out << "total_time = " << format_double(*cfg.total_time) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Task construction

ComplexMatrix gate_product(std::string_view names) {
  std::istringstream in{std::string(names)};
  std::string name;
  std::optional<ComplexMatrix> product;
  while (in >> name) {
    const ComplexMatrix g = standard_gate(name);
    if (product && product->rows() != g.rows()) {
      throw DimensionError("gate sequence mixes 1- and 2-qubit gates");
    }
    product = product ? ComplexMatrix(*product * g) : g;
  }
  if (!product) throw UnknownGate("empty gate sequence");
  return *product;
}

namespace {

struct StateSeeds {
  std::uint64_t training_pool;
  std::uint64_t training_pairs;
  std::uint64_t test_pool;
};

StateSeeds state_seeds(std::uint64_t run_seed) {
  Rng sub = Rng::substream(run_seed, "stategen");
  StateSeeds s{};
  s.training_pool = sub.next_u64();
  s.training_pairs = sub.next_u64();
  s.test_pool = sub.next_u64();
  return s;
}

std::vector<StateVector> default_training_states(int qubits, std::size_t count,
                                                 std::uint64_t run_seed) {
  const StateSeeds seeds = state_seeds(run_seed);
  if (qubits == 1) return gen_training_states(count == 0 ? 100 : count).states;
  const StateSet pool = gen_testing_states(kBellPoolSize, seeds.training_pool);
  return gen_two_qubit_states(pool, count == 0 ? 50 : count, seeds.training_pairs).states;
}

}  // namespace

StateSet default_test_states(int qubits, std::size_t count, std::uint64_t seed, double dt,
                             ControlSampling sampling) {
  if (qubits == 1) return gen_testing_states(count, seed, dt, sampling);
  const StateSet pool = gen_testing_states(kBellPoolSize, seed, dt, sampling);
  return gen_two_qubit_states(pool, count, splitmix64(seed), StateSetKind::Testing);
}

TaskConfig preset_task(std::string_view name, std::uint64_t seed, std::optional<std::size_t> horizon,
                       std::optional<double> total_time) {
  auto single = [&](auto make) {
    return make(default_training_states(1, 0, seed), horizon.value_or(28), total_time.value_or(1.0));
  };
  if (name == "hadamard") return tasks::hadamard_design(horizon.value_or(28), total_time.value_or(1.0));
  if (name == "cnot") return tasks::cnot_design(horizon.value_or(38), total_time.value_or(1.1));
  if (name == "tx") return single(tasks::tx_calibration);
  if (name == "ty") return single(tasks::ty_calibration);
  if (name == "bitflip") return single(tasks::bitflip_calibration);
  if (name == "bell") {
    return tasks::bell_calibration(default_training_states(2, 0, seed), horizon.value_or(38),
                                   total_time.value_or(1.1));
  }
  throw ConfigError("unknown task preset '" + std::string(name) + "'");
}

TaskBundle build_task(const RunConfig& cfg) {
  TaskBundle bundle;
  TaskConfig& task = bundle.task;

  if (cfg.task == "custom") {
    task.name = "custom";
    if (cfg.custom_hamiltonian == "single") {
      task.qubits = 1;
      task.model = HamiltonianModel::SingleQubit;
      task.fixed_u0 = cfg.custom_fixed_u0;
      task.actions = ActionSpace::uniform(cfg.custom_fixed_u0 ? 1 : 2, cfg.custom_control_values);
    } else {
      if (cfg.custom_fixed_u0) throw ConfigError("custom_fixed_u0 applies to the single-qubit model");
      task.qubits = 2;
      task.model = HamiltonianModel::TwoQubit;
      task.actions = ActionSpace::uniform(4, cfg.custom_control_values);
    }
    task.horizon = cfg.horizon_steps.value_or(28);
    task.total_time = cfg.total_time.value_or(1.0);
    try {
      task.target = gate_product(cfg.custom_target);
    } catch (const Error& e) {
      throw ConfigError(std::string("custom_target: ") + e.what());
    }
    task.kind = cfg.custom_kind == "composed" ? TaskKind::ComposedGateCalibration : TaskKind::GateDesign;
    if (task.kind == TaskKind::ComposedGateCalibration) {
      task.training_states = default_training_states(task.qubits, cfg.training_state_count, cfg.seed);
    }
  } else {
    task = preset_task(cfg.task, cfg.seed, cfg.horizon_steps, cfg.total_time);
    if (task.kind != TaskKind::GateDesign && cfg.training_state_count != 0) {
      task.training_states = default_training_states(task.qubits, cfg.training_state_count, cfg.seed);
    }
  }

  if (cfg.training_states_file) {
    if (task.kind == TaskKind::GateDesign) {
      throw ConfigError("training_states_file given for a gate-design task");
    }
    task.training_states = load_state_set(*cfg.training_states_file).states;
  }
  try {
    task.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  if (cfg.test_states_file) {
    bundle.test_states = load_state_set(*cfg.test_states_file);
  } else if (cfg.test_state_count > 0) {
    bundle.test_states = default_test_states(task.qubits, cfg.test_state_count,
                                             state_seeds(cfg.seed).test_pool,
                                             cfg.testing_pulse_duration, cfg.testing_control_sampling);
  }
  if (bundle.test_states) {
    for (const auto& s : bundle.test_states->states) {
      if (s.dim() != (std::size_t{1} << task.qubits)) {
        throw ConfigError("test states do not match the task's qubit count");
      }
    }
  }
  return bundle;
}

}  // namespace qcal::cli
