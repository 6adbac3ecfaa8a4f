#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qcal/envs.hpp"
#include "qcal/net.hpp"
#include "qcal/replay.hpp"
#include "qcal/rng.hpp"

namespace qcal {

/// Which action a stored transition is labelled with.
enum class TransitionLabeling {
  /// (S_t, A_{t+1}, S_{t+1}) for t = 1..N-1: the pulse chosen from S_t.
  NextPulse,
  /// (S_t, A_t, S_{t+1}) for t = 1..N with S_{N+1} = [A_N/z, 1]: the pulse
  /// already encoded in S_t.
  PulseInState,
};

std::string_view to_string(TransitionLabeling labeling);
TransitionLabeling parse_labeling(std::string_view name);

struct HyperParams {
  double learning_rate = 0.005;
  double discount = 0.95;
  std::uint64_t episodes = 200000;
  std::size_t hidden_units = 512;
  std::size_t memory_capacity = 25000;
  std::size_t minibatch_size = 64;
  std::uint64_t train_every_steps = 10;
  std::uint64_t target_update_every_episodes = 10;
  double epsilon_step = 1e-4;
  double state_normalization = 40.0;
  std::uint64_t best_reinject_every_episodes = 3;

  Activation activation = Activation::Relu;
  double momentum = 0.0;
  std::optional<double> gradient_clip;
  LogBase reward_log_base = LogBase::Natural;
  TransitionLabeling labeling = TransitionLabeling::PulseInState;

  /// Throws ConfigError.
  void validate() const;
};

/// MDQL, MDDQL, MDuDQL and MDuDDQL.
struct AgentVariant {
  bool double_q = false;
  bool dueling = false;

  std::string_view name() const;
  /// Accepts mdql, mddql, mdudql, mduddql (case-insensitive).
  static AgentVariant parse(std::string_view name);

  bool operator==(const AgentVariant&) const = default;
};

struct EpsilonState {
  static constexpr double kInitialMax = 0.95;

  double epsilon = 0.0;
  double epsilon_max = kInitialMax;
  double step = 1e-4;
};

/// epsilon <- min(epsilon + step, epsilon_max); once per episode.
void update_epsilon(EpsilonState& eps);

/// epsilon_max from the best fidelity so far:
/// 0.95 below 0.99, 0.9999 on [0.99, 0.999), 0.99999 from 0.999.
void update_epsilon_max(EpsilonState& eps, double best_fidelity);
double epsilon_max_for(double best_fidelity);

/// S_t = [A_t / z, (t - 1) / N]. Throws StepRangeError unless 1 <= t <= N.
Observation encode_state(const ControlAction& action, std::size_t t, std::size_t horizon, double z);

/// Lowest index among the maximal entries.
std::size_t argmax_lowest(const Eigen::Ref<const Eigen::VectorXd>& values);

/// With probability epsilon replay the best episode's first pulse (uniform
/// random while none exists), otherwise a uniform random pulse.
ActionIndex select_first_action(const EpsilonState& eps, const BestEpisode& best,
                                std::size_t action_count, Rng& rng);

/// epsilon-greedy: with probability epsilon the argmax of the value network.
ActionIndex select_action(const QNetwork& net, std::span<const double> state,
                          const EpsilonState& eps, Rng& rng);

/// Q_T per sample. Plain: R + gamma max_A Q(S', A; target). Double: the
/// action is picked by argmax on the value network and scored by the target
/// network. Terminal samples get Q_T = R.
Eigen::VectorXd compute_targets(AgentVariant variant, const QNetwork& value_net,
                                const QNetwork& target_net, std::span<const Transition> batch,
                                double gamma);

/// Greedy rollout of a trained network starting from `first_action`.
std::vector<ActionIndex> greedy_protocol(const QNetwork& net, const ActionSpace& actions,
                                         std::size_t horizon, ActionIndex first_action, double z);

struct EpisodeRecord {
  std::uint64_t episode = 0;
  double fidelity = 0.0;
  double reward = 0.0;
  double epsilon = 0.0;      // in effect during the episode
  double epsilon_max = 0.0;  // in effect during the episode
  double best_fidelity = 0.0;

  bool operator==(const EpisodeRecord&) const = default;
};

struct TrainingResult {
  std::vector<EpisodeRecord> log;
  std::vector<ActionIndex> best_protocol;
  double best_fidelity = 0.0;
  std::optional<ActionIndex> best_first_action;
  QNetwork value_network;
  std::uint64_t environment_calls = 0;
  std::uint64_t network_updates = 0;
};

struct TrainingHooks {
  std::function<void(const EpisodeRecord&)> on_episode;
  /// Checked before each episode; a set flag ends training early.
  const std::atomic<bool>* stop = nullptr;
};

/// Runs the episodic training loop against a black-box environment.
///
/// Per episode: pick A_1, roll out A_2..A_N epsilon-greedily while training
/// the value network every `train_every_steps` global control steps, submit
/// the protocol once, reward every transition with -log(1 - F), store the
/// episode, track the best one and re-store it every
/// `best_reinject_every_episodes`, sync the target network every
/// `target_update_every_episodes`, then advance epsilon and epsilon_max.
TrainingResult run_training(const Environment& env, AgentVariant variant, const HyperParams& hp,
                            std::uint64_t seed, const TrainingHooks& hooks = {});

}  // namespace qcal
