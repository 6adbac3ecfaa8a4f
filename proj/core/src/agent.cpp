#include "qcal/agent.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "qcal/errors.hpp"

namespace qcal {

std::string_view to_string(TransitionLabeling labeling) {
  return labeling == TransitionLabeling::NextPulse ? "next_pulse" : "pulse_in_state";
}

TransitionLabeling parse_labeling(std::string_view name) {
  if (name == "next_pulse") return TransitionLabeling::NextPulse;
  if (name == "pulse_in_state") return TransitionLabeling::PulseInState;
  throw ConfigError("unknown transition labeling '" + std::string(name) + "'");
}

void HyperParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning rate must be positive");
  require(discount > 0.0 && discount <= 1.0, "discount must lie in (0, 1]");
  require(hidden_units > 0, "hidden layer size must be positive");
  require(memory_capacity > 0, "replay memory capacity must be positive");
  require(minibatch_size > 0, "minibatch size must be positive");
  require(train_every_steps > 0, "training period must be positive");
  require(target_update_every_episodes > 0, "target update period must be positive");
  require(epsilon_step > 0.0 && epsilon_step < 1.0, "epsilon step must lie in (0, 1)");
  require(state_normalization > 0.0 && std::isfinite(state_normalization),
          "state normalization must be positive");
  require(best_reinject_every_episodes > 0, "best-episode reinjection period must be positive");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(!gradient_clip || *gradient_clip > 0.0, "gradient clip must be positive");
}

std::string_view AgentVariant::name() const {
  if (double_q) return dueling ? "mduddql" : "mddql";
  return dueling ? "mdudql" : "mdql";
}

AgentVariant AgentVariant::parse(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "mdql") return {false, false};
  if (lower == "mddql") return {true, false};
  if (lower == "mdudql") return {false, true};
  if (lower == "mduddql") return {true, true};
  throw ConfigError("unknown agent variant '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Exploration schedule

void update_epsilon(EpsilonState& eps) {
  eps.epsilon = std::min(eps.epsilon + eps.step, eps.epsilon_max);
}

double epsilon_max_for(double best_fidelity) {
  if (best_fidelity >= 0.999) return 0.99999;
  if (best_fidelity >= 0.99) return 0.9999;
  return EpsilonState::kInitialMax;
}

void update_epsilon_max(EpsilonState& eps, double best_fidelity) {
  eps.epsilon_max = epsilon_max_for(best_fidelity);
  eps.epsilon = std::min(eps.epsilon, eps.epsilon_max);
}

// ---------------------------------------------------------------------------
// Action selection

Observation encode_state(const ControlAction& action, std::size_t t, std::size_t horizon, double z) {
  if (t < 1 || t > horizon) {
    throw StepRangeError("step " + std::to_string(t) + " outside [1, " + std::to_string(horizon) + "]");
  }
  Observation s;
  s.reserve(action.size() + 1);
  for (double u : action) s.push_back(u / z);
  s.push_back(static_cast<double>(t - 1) / static_cast<double>(horizon));
  return s;
}

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

ActionIndex select_first_action(const EpsilonState& eps, const BestEpisode& best,
                                std::size_t action_count, Rng& rng) {
  const double x = rng.uniform01();
  if (x < eps.epsilon && best.first_action) return *best.first_action;
  return rng.index(action_count);
}

ActionIndex select_action(const QNetwork& net, std::span<const double> state,
                          const EpsilonState& eps, Rng& rng) {
  const double x = rng.uniform01();
  if (x < eps.epsilon) return argmax_lowest(net.forward(state));
  return rng.index(net.architecture().output_dim);
}

Eigen::VectorXd compute_targets(AgentVariant variant, const QNetwork& value_net,
                                const QNetwork& target_net, std::span<const Transition> batch,
                                double gamma) {
  if (!(value_net.architecture() == target_net.architecture())) {
    throw ShapeError("value and target networks differ in architecture");
  }
  const auto k = static_cast<Eigen::Index>(batch.size());
  Eigen::VectorXd targets(k);
  if (k == 0) return targets;

  const auto in = static_cast<Eigen::Index>(value_net.architecture().input_dim);
  Eigen::MatrixXd next(in, k);
  for (Eigen::Index s = 0; s < k; ++s) {
    const auto& ns = batch[static_cast<std::size_t>(s)].next_state;
    if (static_cast<Eigen::Index>(ns.size()) != in) throw ShapeError("next state has the wrong size");
    next.col(s) = Eigen::Map<const Eigen::VectorXd>(ns.data(), in);
  }
  const Eigen::MatrixXd q_target = target_net.forward_batch(next);
  Eigen::MatrixXd q_online;
  if (variant.double_q) q_online = value_net.forward_batch(next);

  for (Eigen::Index s = 0; s < k; ++s) {
    const Transition& t = batch[static_cast<std::size_t>(s)];
    if (t.terminal) {
      targets[s] = t.reward;
      continue;
    }
    double bootstrap;
    if (variant.double_q) {
      const auto a = static_cast<Eigen::Index>(argmax_lowest(q_online.col(s)));
      bootstrap = q_target(a, s);
    } else {
      bootstrap = q_target.col(s).maxCoeff();
    }
    targets[s] = t.reward + gamma * bootstrap;
  }
  return targets;
}

std::vector<ActionIndex> greedy_protocol(const QNetwork& net, const ActionSpace& actions,
                                         std::size_t horizon, ActionIndex first_action, double z) {
  if (first_action >= actions.size()) throw ActionShapeError("first action out of range");
  std::vector<ActionIndex> protocol{first_action};
  protocol.reserve(horizon);
  Observation state = encode_state(actions.action(first_action), 1, horizon, z);
  for (std::size_t t = 2; t <= horizon; ++t) {
    const ActionIndex a = argmax_lowest(net.forward(state));
    protocol.push_back(a);
    state = encode_state(actions.action(a), t, horizon, z);
  }
  return protocol;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

Batch make_batch(std::span<const Transition> samples, Eigen::VectorXd targets, std::size_t input_dim) {
  Batch batch;
  const auto k = static_cast<Eigen::Index>(samples.size());
  const auto in = static_cast<Eigen::Index>(input_dim);
  batch.states.resize(in, k);
  batch.actions.reserve(samples.size());
  for (Eigen::Index s = 0; s < k; ++s) {
    const Transition& t = samples[static_cast<std::size_t>(s)];
    if (static_cast<Eigen::Index>(t.state.size()) != in) throw ShapeError("state has the wrong size");
    batch.states.col(s) = Eigen::Map<const Eigen::VectorXd>(t.state.data(), in);
    batch.actions.push_back(t.action);
  }
  batch.targets = std::move(targets);
  return batch;
}

}  // namespace

TrainingResult run_training(const Environment& env, AgentVariant variant, const HyperParams& hp,
                            std::uint64_t seed, const TrainingHooks& hooks) {
  hp.validate();
  const ActionSpace& space = env.actions();
  const std::size_t horizon = env.horizon();
  if (horizon < 1) throw ConfigError("environment horizon must be at least 1");
  if (space.size() < 1) throw ConfigError("environment has no actions");

  const Architecture arch{space.field_count() + 1, hp.hidden_units, space.size(), variant.dueling,
                          hp.activation};
  QNetwork value_net(arch, Rng::substream(seed, "weights").next_u64());
  QNetwork target_net = value_net;
  GradientDescent optimizer({hp.learning_rate, hp.momentum, hp.gradient_clip});

  Rng action_rng = Rng::substream(seed, "action");
  Rng batch_rng = Rng::substream(seed, "minibatch");

  ReplayMemory memory(hp.memory_capacity);
  BestEpisode best;
  EpsilonState eps;
  eps.step = hp.epsilon_step;
  const RewardFunction reward_fn{hp.reward_log_base};
  const double z = hp.state_normalization;

  TrainingResult result{{}, {}, 0.0, std::nullopt, value_net, 0, 0};
  result.log.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(hp.episodes, 1u << 20)));

  std::uint64_t step = 0;
  std::vector<ActionIndex> protocol(horizon);
  std::vector<ControlAction> controls(horizon);

  auto train_value_network = [&] {
    const std::vector<Transition> samples = sample_minibatch(memory, hp.minibatch_size, batch_rng);
    Eigen::VectorXd targets = compute_targets(variant, value_net, target_net, samples, hp.discount);
    optimizer.step(value_net, make_batch(samples, std::move(targets), arch.input_dim));
    ++result.network_updates;
  };

  for (std::uint64_t e = 1; e <= hp.episodes; ++e) {
    if (hooks.stop && hooks.stop->load(std::memory_order_relaxed)) break;

    const EpsilonState eps_in_effect = eps;
    std::vector<PendingTransition> pending;
    pending.reserve(horizon);

    protocol[0] = select_first_action(eps, best, space.size(), action_rng);
    controls[0] = space.action(protocol[0]);
    Observation state = encode_state(controls[0], 1, horizon, z);

    for (std::size_t i = 2; i <= horizon; ++i) {
      const ActionIndex a = select_action(value_net, state, eps, action_rng);
      protocol[i - 1] = a;
      controls[i - 1] = space.action(a);
      Observation next = encode_state(controls[i - 1], i, horizon, z);
      const ActionIndex label =
          hp.labeling == TransitionLabeling::NextPulse ? a : protocol[i - 2];
      pending.push_back({std::move(state), label, next});
      state = std::move(next);

      ++step;
      if (step % hp.train_every_steps == 0 && !memory.empty()) train_value_network();
    }
    if (hp.labeling == TransitionLabeling::PulseInState) {
      Observation terminal_state;
      for (double u : controls[horizon - 1]) terminal_state.push_back(u / z);
      terminal_state.push_back(1.0);
      pending.push_back({std::move(state), protocol[horizon - 1], std::move(terminal_state)});
    }

    const Feedback feedback = env.evaluate(protocol);
    ++result.environment_calls;
    const double fidelity = feedback.fidelity;
    const std::vector<Transition> episode = finalize_episode(std::move(pending), fidelity, reward_fn);
    memory.push_episode(episode);

    if (update_best(best, episode, fidelity, protocol[0])) {
      result.best_protocol = protocol;
      result.best_fidelity = fidelity;
      result.best_first_action = protocol[0];
    }
    reinject_best(memory, best, e, hp.best_reinject_every_episodes);
    if (e % hp.target_update_every_episodes == 0) copy_weights(value_net, target_net);

    const EpisodeRecord record{e,
                               fidelity,
                               reward_fn(fidelity),
                               eps_in_effect.epsilon,
                               eps_in_effect.epsilon_max,
                               best.fidelity};
    result.log.push_back(record);
    if (hooks.on_episode) hooks.on_episode(record);

    update_epsilon(eps);
    update_epsilon_max(eps, best.fidelity);
  }

  result.value_network = std::move(value_net);
  return result;
}

}  // namespace qcal
