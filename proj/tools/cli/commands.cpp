#include "commands.hpp"

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "oracle.hpp"
#include "qcal/errors.hpp"
#include "qcal/net.hpp"

namespace qcal::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void handle_stop_signal(int) { g_stop.store(true); }

class SignalGuard {
 public:
  SignalGuard() {
    g_stop.store(false);
    prev_int_ = std::signal(SIGINT, handle_stop_signal);
    prev_term_ = std::signal(SIGTERM, handle_stop_signal);
  }
  ~SignalGuard() {
    std::signal(SIGINT, prev_int_);
    std::signal(SIGTERM, prev_term_);
  }
  SignalGuard(const SignalGuard&) = delete;
  SignalGuard& operator=(const SignalGuard&) = delete;

 private:
  void (*prev_int_)(int) = SIG_DFL;
  void (*prev_term_)(int) = SIG_DFL;
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void emit(const std::optional<fs::path>& out, const std::string& text) {
  if (out) {
    write_text(*out, text);
  } else {
    std::cout << text;
  }
}

json stats_json(const BoxStats& s) {
  return json{{"count", s.count}, {"min", s.min}, {"q1", s.q1},    {"median", s.median},
              {"q3", s.q3},       {"max", s.max}, {"mean", s.mean}};
}

json hyperparams_json(const HyperParams& hp) {
  json j;
  j["learning_rate"] = hp.learning_rate;
  j["discount"] = hp.discount;
  j["episodes"] = hp.episodes;
  j["hidden_units"] = hp.hidden_units;
  j["memory_capacity_transitions"] = hp.memory_capacity;
  j["minibatch_size"] = hp.minibatch_size;
  j["train_every_steps"] = hp.train_every_steps;
  j["target_update_every_episodes"] = hp.target_update_every_episodes;
  j["epsilon_step_per_episode"] = hp.epsilon_step;
  j["state_normalization"] = hp.state_normalization;
  j["best_reinject_every_episodes"] = hp.best_reinject_every_episodes;
  j["activation"] = std::string(to_string(hp.activation));
  j["momentum"] = hp.momentum;
  j["gradient_clip"] = hp.gradient_clip ? json(*hp.gradient_clip) : json(nullptr);
  j["reward_log_base"] = hp.reward_log_base == LogBase::Natural ? "e" : "10";
  j["transition_labeling"] = std::string(to_string(hp.labeling));
  return j;
}

std::vector<double> infidelities(const FidelityVector& f) {
  std::vector<double> out;
  out.reserve(f.size());
  for (double x : f) out.push_back(1.0 - x);
  return out;
}

ProtocolFile make_protocol_file(const TaskConfig& cfg, std::vector<ActionIndex> indices,
                                double fidelity) {
  ProtocolFile p;
  p.task = cfg.name;
  p.qubits = cfg.qubits;
  p.horizon = cfg.horizon;
  p.total_time = cfg.total_time;
  for (ActionIndex i : indices) p.actions.push_back(cfg.actions.action(i));
  p.indices = std::move(indices);
  p.fidelity = fidelity;
  return p;
}

void check_states(const TaskConfig& cfg, std::span<const StateVector> states) {
  const std::size_t dim = std::size_t{1} << cfg.qubits;
  for (const auto& s : states) {
    if (s.dim() != dim) {
      throw TaskMismatchError("state of dimension " + std::to_string(s.dim()) + " for a " +
                              std::to_string(cfg.qubits) + "-qubit task");
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

std::string protocol_to_json(const ProtocolFile& p) {
  json j;
  j["task"] = p.task;
  j["qubits"] = p.qubits;
  j["horizon"] = p.horizon;
  j["total_time"] = p.total_time;
  j["indices"] = p.indices;
  j["actions"] = p.actions;
  j["fidelity"] = p.fidelity;
  return j.dump(2) + "\n";
}

ProtocolFile protocol_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ProtocolFile p;
    p.task = j.at("task").get<std::string>();
    p.qubits = j.at("qubits").get<int>();
    p.horizon = j.at("horizon").get<std::size_t>();
    p.total_time = j.at("total_time").get<double>();
    p.indices = j.at("indices").get<std::vector<ActionIndex>>();
    p.actions = j.at("actions").get<std::vector<ControlAction>>();
    p.fidelity = j.at("fidelity").get<double>();
    if (p.indices.size() != p.horizon || p.actions.size() != p.horizon) {
      throw ParseError("protocol length does not match its horizon");
    }
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("protocol file: ") + e.what());
  }
}

// ---------------------------------------------------------------------------

TrainOutcome cmd_train(const TrainOptions& opts) {
  RunConfig cfg = load_run_config(opts.config);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.output_dir = *opts.out;
  if (opts.episodes) {
    cfg.hp.episodes = *opts.episodes;
    cfg.hp.validate();
  }
  const TaskBundle bundle = build_task(cfg);
  auto task = std::make_shared<const Task>(bundle.task);
  const BlackBoxEnvironment env(task);

  fs::create_directories(cfg.output_dir);
  write_text(cfg.output_dir / "config.cfg", render_run_config(cfg));

  std::ofstream log(cfg.output_dir / "training_log.csv", std::ios::binary);
  if (!log) throw Error("cannot write training log in " + cfg.output_dir.string());
  write_log_header(log);
  log.flush();

  double max_logged = -1.0;
  std::uint64_t rows = 0;
  TrainingHooks hooks;
  hooks.stop = &g_stop;
  hooks.on_episode = [&](const EpisodeRecord& rec) {
    write_log_row(log, rec);
    log.flush();
    max_logged = std::max(max_logged, rec.fidelity);
    ++rows;
    if (opts.progress_every != 0 && rec.episode % opts.progress_every == 0) {
      std::cerr << "episode " << rec.episode << "  best infidelity "
                << format_double(1.0 - rec.best_fidelity) << "\n";
    }
  };

  TrainOutcome outcome = [&] {
    SignalGuard guard;
    TrainingResult r = run_training(env, cfg.variant, cfg.hp, cfg.seed, hooks);
    return TrainOutcome{std::move(r), cfg.output_dir, g_stop.load()};
  }();
  log.close();
  const TrainingResult& result = outcome.result;

  if (!result.best_protocol.empty()) {
    write_text(cfg.output_dir / "best_protocol.json",
               protocol_to_json(make_protocol_file(bundle.task, result.best_protocol,
                                                   result.best_fidelity)));
  }

  Checkpoint ckpt{result.value_network, cfg.seed, rows, result.best_first_action};
  save_checkpoint(ckpt, cfg.output_dir / "checkpoint.json");

  json summary;
  summary["task"] = bundle.task.name;
  summary["variant"] = std::string(cfg.variant.name());
  summary["seed"] = cfg.seed;
  summary["horizon_steps"] = bundle.task.horizon;
  summary["total_time"] = bundle.task.total_time;
  summary["episodes_completed"] = rows;
  summary["interrupted"] = outcome.interrupted;
  summary["best_fidelity"] = rows ? json(max_logged) : json(nullptr);
  summary["best_infidelity"] = rows ? json(1.0 - max_logged) : json(nullptr);
  summary["best_protocol"] = result.best_protocol;
  summary["environment_calls"] = result.environment_calls;
  summary["network_updates"] = result.network_updates;
  summary["hyperparameters"] = hyperparams_json(cfg.hp);

  if (bundle.test_states && !result.best_protocol.empty()) {
    const ComplexMatrix uf = task->final_unitary(result.best_protocol);
    const BoxStats s = box_stats(infidelities(task->state_fidelities(uf, bundle.test_states->states)));
    const json j = stats_json(s);
    write_text(cfg.output_dir / "test_eval.json", j.dump(2) + "\n");
    summary["test_infidelity"] = j;
  }
  write_text(cfg.output_dir / "summary.json", summary.dump(2) + "\n");
  return outcome;
}

// ---------------------------------------------------------------------------

namespace {

TaskConfig resolve_task(const std::optional<std::string>& name,
                        const std::optional<fs::path>& config, std::optional<std::size_t> horizon,
                        std::optional<double> total_time, std::uint64_t seed) {
  if (name && config) throw ConfigError("give either --task or --config, not both");
  if (config) {
    RunConfig cfg = load_run_config(*config);
    if (horizon) cfg.horizon_steps = horizon;
    if (total_time) cfg.total_time = total_time;
    return build_task(cfg).task;
  }
  if (!name) throw ConfigError("a task is required (--task or --config)");
  if (*name == "custom") throw ConfigError("custom tasks need --config");
  return preset_task(*name, seed, horizon, total_time);
}

}  // namespace

BoxStats cmd_evaluate(const EvaluateOptions& opts) {
  if (opts.protocol.has_value() == opts.checkpoint.has_value()) {
    throw ConfigError("give exactly one of --protocol or --checkpoint");
  }
  std::optional<ProtocolFile> pfile;
  if (opts.protocol) pfile = protocol_from_json(read_text(*opts.protocol));

  std::optional<std::string> task_name = opts.task;
  std::optional<std::size_t> horizon = opts.horizon;
  std::optional<double> total_time = opts.total_time;
  if (!task_name && !opts.config && pfile) {
    task_name = pfile->task;
    horizon = horizon.value_or(pfile->horizon);
    total_time = total_time.value_or(pfile->total_time);
  }
  const Task task(resolve_task(task_name, opts.config, horizon, total_time, opts.seed));
  const TaskConfig& cfg = task.config();

  std::vector<ActionIndex> protocol;
  if (pfile) {
    if (pfile->qubits != cfg.qubits || pfile->horizon != cfg.horizon) {
      throw TaskMismatchError("protocol was made for a different task shape");
    }
    for (std::size_t i = 0; i < pfile->horizon; ++i) {
      if (!cfg.actions.contains(pfile->actions[i]) ||
          cfg.actions.index_of(pfile->actions[i]) != pfile->indices[i]) {
        throw TaskMismatchError("protocol pulse " + std::to_string(i + 1) +
                                " is not in the task's action space");
      }
    }
    protocol = pfile->indices;
  } else {
    const Checkpoint ckpt = load_checkpoint(*opts.checkpoint);
    const Architecture& arch = ckpt.network.architecture();
    if (arch.input_dim != cfg.actions.field_count() + 1 || arch.output_dim != cfg.actions.size()) {
      throw TaskMismatchError("checkpoint network does not fit the task's action space");
    }
    if (!ckpt.first_action) throw TaskMismatchError("checkpoint has no recorded first pulse");
    protocol = greedy_protocol(ckpt.network, cfg.actions, cfg.horizon, *ckpt.first_action,
                               opts.state_normalization);
  }

  StateSet states;
  if (opts.states) {
    states = load_state_set(*opts.states);
  } else {
    states = default_test_states(cfg.qubits, opts.count, opts.seed);
  }
  check_states(cfg, states.states);

  const ComplexMatrix uf = task.final_unitary(protocol);
  const BoxStats s = box_stats(infidelities(task.state_fidelities(uf, states.states)));
  emit(opts.out, stats_json(s).dump(2) + "\n");
  return s;
}

std::string cmd_oracle(const OracleOptions& opts) {
  std::optional<std::string> name = opts.task;
  if (!name && !opts.config) name = "hadamard";
  const Task task(resolve_task(name, opts.config, opts.horizon, opts.total_time, 0));
  const OracleResult r = exhaustive_search(task);
  json j;
  j["task"] = task.config().name;
  j["horizon"] = task.horizon();
  j["total_time"] = task.config().total_time;
  j["enumerated"] = r.enumerated;
  j["fidelity"] = r.fidelity;
  j["infidelity"] = 1.0 - r.fidelity;
  j["protocol"] = r.protocol;
  std::vector<ControlAction> actions;
  for (ActionIndex i : r.protocol) actions.push_back(task.actions().action(i));
  j["actions"] = actions;
  const std::string text = j.dump(2) + "\n";
  emit(opts.out, text);
  return text;
}

std::string cmd_gen_states(const GenStatesOptions& opts) {
  StateSet set;
  if (opts.kind == "training") {
    set = gen_training_states(opts.count, opts.theta);
  } else if (opts.kind == "testing") {
    set = gen_testing_states(opts.count, opts.seed, opts.dt, opts.sampling);
  } else if (opts.kind == "two-qubit") {
    set = default_test_states(2, opts.count, opts.seed, opts.dt, opts.sampling);
  } else {
    throw ConfigError("--kind must be training, testing or two-qubit");
  }
  const std::string text = to_json(set);
  emit(opts.out, text);
  return text;
}

std::string cmd_report(const ReportOptions& opts) {
  const auto log = read_log(opts.log);
  const std::string text = curve_to_csv(windowed_curve(log, opts.window, opts.mode));
  emit(opts.out, text);
  return text;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv) {
  CLI::App app{"Model-free quantum gate design and calibration with deep Q-learning"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train an agent from a run config");
  train_cmd->add_option("config", train.config, "Run config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_option("--out", train.out, "Override the output directory");
  train_cmd->add_option("--episodes", train.episodes, "Override the episode count");
  train_cmd->add_option("--progress", train.progress_every, "Report every N episodes on stderr");

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Test a protocol or checkpoint on a state set");
  eval_cmd->add_option("--protocol", eval.protocol, "best_protocol.json")->check(CLI::ExistingFile);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "checkpoint.json")->check(CLI::ExistingFile);
  eval_cmd->add_option("--task", eval.task, "Task preset");
  eval_cmd->add_option("--config", eval.config, "Run config describing the task")->check(CLI::ExistingFile);
  eval_cmd->add_option("--horizon", eval.horizon, "Number of pulses N");
  eval_cmd->add_option("--total-time", eval.total_time, "Total evolution time T");
  eval_cmd->add_option("--states", eval.states, "State set JSON")->check(CLI::ExistingFile);
  eval_cmd->add_option("--count", eval.count, "Generated test states when --states is absent");
  eval_cmd->add_option("--seed", eval.seed, "Seed for generated test states");
  eval_cmd->add_option("--state-normalization", eval.state_normalization,
                       "Action scale z used by the checkpoint's agent");
  eval_cmd->add_option("--out", eval.out, "Output JSON (stdout if absent)");

  OracleOptions oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exhaustively search all protocols");
  oracle_cmd->add_option("--task", oracle.task, "Task preset (default hadamard)");
  oracle_cmd->add_option("--config", oracle.config, "Run config describing the task")->check(CLI::ExistingFile);
  oracle_cmd->add_option("--horizon", oracle.horizon, "Number of pulses N");
  oracle_cmd->add_option("--total-time", oracle.total_time, "Total evolution time T");
  oracle_cmd->add_option("--out", oracle.out, "Output JSON (stdout if absent)");

  GenStatesOptions gen;
  std::string sampling = "continuous";
  auto* gen_cmd = app.add_subcommand("gen-states", "Generate a training or testing state set");
  gen_cmd->add_option("--kind", gen.kind, "training | testing | two-qubit");
  gen_cmd->add_option("--count", gen.count, "Number of states");
  gen_cmd->add_option("--seed", gen.seed, "Seed for testing states");
  gen_cmd->add_option("--theta", gen.theta, "Phase angle for training states");
  gen_cmd->add_option("--dt", gen.dt, "Pulse duration for testing states");
  gen_cmd->add_option("--sampling", sampling, "continuous | two_point");
  gen_cmd->add_option("--out", gen.out, "Output JSON (stdout if absent)");

  ReportOptions report;
  std::string mode = "disjoint";
  auto* report_cmd = app.add_subcommand("report", "Windowed infidelity curve from a training log");
  report_cmd->add_option("--log", report.log, "training_log.csv")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--window", report.window, "Window size in episodes");
  report_cmd->add_option("--mode", mode, "disjoint | sliding");
  report_cmd->add_option("--out", report.out, "Output CSV (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*train_cmd) {
      const TrainOutcome o = cmd_train(train);
      std::cerr << "best infidelity " << format_double(1.0 - o.result.best_fidelity) << ", artifacts in "
                << o.output_dir.string() << "\n";
      if (o.interrupted) {
        std::cerr << "interrupted; partial results written\n";
        return 2;
      }
    } else if (*eval_cmd) {
      cmd_evaluate(eval);
    } else if (*oracle_cmd) {
      cmd_oracle(oracle);
    } else if (*gen_cmd) {
      if (sampling == "continuous") {
        gen.sampling = ControlSampling::Continuous;
      } else if (sampling == "two_point") {
        gen.sampling = ControlSampling::TwoPoint;
      } else {
        throw ConfigError("--sampling must be continuous or two_point");
      }
      cmd_gen_states(gen);
    } else if (*report_cmd) {
      report.mode = parse_window_mode(mode);
      cmd_report(report);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace qcal::cli
