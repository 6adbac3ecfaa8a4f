#include "qcal/replay.hpp"

#include <cmath>
#include <string>

#include "qcal/errors.hpp"

namespace qcal {

double RewardFunction::operator()(double fidelity) const {
  if (!(fidelity >= 0.0 && fidelity <= 1.0)) {
    throw FidelityRangeError("fidelity " + std::to_string(fidelity) + " outside [0, 1]");
  }
  const double f = std::min(fidelity, kFidelityCeiling);
  return base == LogBase::Natural ? -std::log1p(-f) : -std::log10(1.0 - f);
}

std::vector<Transition> finalize_episode(std::vector<PendingTransition> buffer, double fidelity,
                                         const RewardFunction& reward_fn) {
  const double reward = reward_fn(fidelity);
  std::vector<Transition> out;
  out.reserve(buffer.size());
  for (auto& p : buffer) {
    out.push_back(Transition{std::move(p.state), p.action, std::move(p.next_state), reward, false});
  }
  if (!out.empty()) out.back().terminal = true;
  return out;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay memory capacity must be positive");
  ring_.reserve(capacity_);
}

void ReplayMemory::push(Transition t) {
  ++inserted_;
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(t));
    ++size_;
    return;
  }
  ring_[head_] = std::move(t);
  head_ = (head_ + 1) % capacity_;
}

void ReplayMemory::push_episode(std::span<const Transition> episode) {
  for (const auto& t : episode) push(t);
}

const Transition& ReplayMemory::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay memory index out of range");
  return ring_[(head_ + i) % ring_.size()];
}

bool update_best(BestEpisode& best, std::span<const Transition> episode, double fidelity,
                 ActionIndex first_action) {
  if (!(fidelity > best.fidelity)) return false;
  best.transitions.assign(episode.begin(), episode.end());
  best.fidelity = fidelity;
  best.first_action = first_action;
  return true;
}

bool reinject_best(ReplayMemory& mem, const BestEpisode& best, std::uint64_t episode_index,
                   std::uint64_t k) {
  if (k == 0) throw ConfigError("reinjection period must be positive");
  if (episode_index % k != 0 || best.transitions.empty()) return false;
  mem.push_episode(best.transitions);
  return true;
}

std::vector<Transition> sample_minibatch(const ReplayMemory& mem, std::size_t k, Rng& rng) {
  if (mem.empty()) throw EmptyMemoryError("cannot sample from an empty replay memory");
  std::vector<Transition> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(mem[rng.index(mem.size())]);
  return out;
}

}  // namespace qcal
