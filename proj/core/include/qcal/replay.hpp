#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qcal/envs.hpp"
#include "qcal/rng.hpp"

namespace qcal {

using Observation = std::vector<double>;

/// A transition recorded during rollout, before the episode reward is known.
struct PendingTransition {
  Observation state;
  ActionIndex action = 0;
  Observation next_state;
};

struct Transition {
  Observation state;
  ActionIndex action = 0;
  Observation next_state;
  double reward = 0.0;
  bool terminal = false;

  bool operator==(const Transition&) const = default;
};

enum class LogBase { Natural, Ten };

/// R = -log(1 - F). F = 1 is clamped to kFidelityCeiling so R stays finite
/// (about 27.63 with the natural log).
struct RewardFunction {
  static constexpr double kFidelityCeiling = 1.0 - 1e-12;

  LogBase base = LogBase::Natural;

  /// Throws FidelityRangeError outside [0, 1].
  double operator()(double fidelity) const;
};

/// Stamps every transition with the same episode reward and marks the last
/// one terminal.
std::vector<Transition> finalize_episode(std::vector<PendingTransition> buffer, double fidelity,
                                         const RewardFunction& reward_fn);

/// Bounded FIFO of transitions; the oldest entry is evicted first.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(Transition t);
  void push_episode(std::span<const Transition> episode);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return size_ == 0; }
  /// Total number of pushes since construction, including evicted ones.
  std::uint64_t inserted() const { return inserted_; }

  /// i = 0 is the oldest stored transition.
  const Transition& operator[](std::size_t i) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> ring_;
  std::size_t head_ = 0;  // slot of the oldest entry
  std::size_t size_ = 0;
  std::uint64_t inserted_ = 0;
};

struct BestEpisode {
  std::vector<Transition> transitions;
  double fidelity = 0.0;
  std::optional<ActionIndex> first_action;

  bool empty() const { return transitions.empty() && !first_action; }
};

/// Replaces the stored episode iff fidelity > best.fidelity.
bool update_best(BestEpisode& best, std::span<const Transition> episode, double fidelity,
                 ActionIndex first_action);

/// Pushes a copy of the best episode when episode_index % k == 0.
/// Returns whether it fired; a no-op while no best episode exists.
bool reinject_best(ReplayMemory& mem, const BestEpisode& best, std::uint64_t episode_index,
                   std::uint64_t k);

/// K uniform draws with replacement. Throws EmptyMemoryError.
std::vector<Transition> sample_minibatch(const ReplayMemory& mem, std::size_t k, Rng& rng);

}  // namespace qcal
