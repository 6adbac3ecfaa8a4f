#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <vector>

#include "qcal/errors.hpp"
#include "qcal/replay.hpp"
#include "qcal/rng.hpp"

using namespace qcal;

namespace {

/// Transition tagged by its action field so FIFO order is observable.
Transition tagged(std::size_t tag, bool terminal = false) {
  return Transition{{static_cast<double>(tag)}, tag, {static_cast<double>(tag)}, 0.0, terminal};
}

std::vector<Transition> episode(std::size_t first_tag, std::size_t len) {
  std::vector<Transition> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back(tagged(first_tag + i, i + 1 == len));
  return out;
}

std::vector<PendingTransition> pending(std::size_t len) {
  std::vector<PendingTransition> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back({{0.1 * i, 0.0}, i % 2, {0.1 * (i + 1), 0.0}});
  return out;
}

}  // namespace

TEST(Reward, KnownValues) {
  const RewardFunction r;
  EXPECT_EQ(r(0.0), 0.0);
  EXPECT_NEAR(r(0.99), 4.605170185988091, 1e-12);
  EXPECT_NEAR(r(1.0), -std::log(1e-12), 1e-3);
  EXPECT_TRUE(std::isfinite(r(1.0)));
  const RewardFunction r10{LogBase::Ten};
  EXPECT_NEAR(r10(0.99), 2.0, 1e-12);
  EXPECT_THROW(r(-0.1), FidelityRangeError);
  EXPECT_THROW(r(1.5), FidelityRangeError);
}

TEST(Reward, StrictlyIncreasing) {
  const RewardFunction r;
  double prev = r(0.0);
  for (int i = 1; i < 10000; ++i) {
    const double cur = r(i / 10000.0);
    ASSERT_GT(cur, prev);
    prev = cur;
  }
}

TEST(FinalizeEpisode, UniformRewardLastTerminal) {
  const auto out = finalize_episode(pending(5), 0.9, RewardFunction{});
  ASSERT_EQ(out.size(), 5u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].reward, out[0].reward);
    EXPECT_EQ(out[i].terminal, i == 4);
  }
  EXPECT_NEAR(out[0].reward, -std::log(0.1), 1e-12);
  EXPECT_TRUE(finalize_episode({}, 0.5, RewardFunction{}).empty());
}

TEST(FinalizeEpisode, RewardVarianceIsZeroForRandomEpisodes) {
  Rng rng(1);
  for (int k = 0; k < 200; ++k) {
    const auto out = finalize_episode(pending(1 + rng.index(40)), rng.uniform01(), RewardFunction{});
    // zero variance means every reward equals the first one exactly
    for (const auto& t : out) ASSERT_EQ(t.reward, out.front().reward);
  }
}

TEST(ReplayMemory, FifoEviction) {
  ReplayMemory mem(10);
  for (std::size_t e = 0; e < 3; ++e) {
    const auto ep = episode(4 * e, 4);
    mem.push_episode(ep);
  }
  ASSERT_EQ(mem.size(), 10u);
  EXPECT_EQ(mem.inserted(), 12u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(mem[i].action, i + 2);
  mem.push_episode({});
  EXPECT_EQ(mem.size(), 10u);
  EXPECT_THROW(ReplayMemory(0), ConfigError);
  EXPECT_THROW(mem[10], std::out_of_range);
}

TEST(ReplayMemory, FuzzAgainstDequeOracle) {
  Rng rng(2);
  const std::size_t capacity = 97;
  ReplayMemory mem(capacity);
  std::deque<std::size_t> oracle;
  std::size_t tag = 0;
  for (int op = 0; op < 20000; ++op) {
    const std::size_t n = rng.index(8);
    std::vector<Transition> ep;
    for (std::size_t i = 0; i < n; ++i) {
      ep.push_back(tagged(tag));
      oracle.push_back(tag++);
      if (oracle.size() > capacity) oracle.pop_front();
    }
    mem.push_episode(ep);
    ASSERT_LE(mem.size(), capacity);
    ASSERT_EQ(mem.size(), oracle.size());
    if (op % 97 == 0) {
      for (std::size_t i = 0; i < oracle.size(); ++i) ASSERT_EQ(mem[i].action, oracle[i]);
    }
  }
}

TEST(BestEpisode, StrictImprovementOnly) {
  BestEpisode best;
  const auto ep = episode(0, 3);
  EXPECT_TRUE(update_best(best, ep, 0.5, 1));
  EXPECT_EQ(best.fidelity, 0.5);
  EXPECT_FALSE(update_best(best, episode(10, 3), 0.5, 0));
  EXPECT_EQ(best.transitions[0].action, 0u);
  EXPECT_EQ(best.first_action, std::optional<ActionIndex>{1});
  EXPECT_TRUE(update_best(best, episode(10, 3), 0.6, 0));
  EXPECT_EQ(best.fidelity, 0.6);
  EXPECT_EQ(best.transitions[0].action, 10u);
}

TEST(BestEpisode, TracksRunningMaximum) {
  Rng rng(3);
  BestEpisode best;
  double running = 0.0;
  for (int k = 0; k < 5000; ++k) {
    const double f = rng.uniform01();
    update_best(best, episode(0, 2), f, 0);
    running = std::max(running, f);
    ASSERT_EQ(best.fidelity, running);
  }
}

TEST(Reinjection, FiresOnMultiplesOfK) {
  ReplayMemory mem(100);
  BestEpisode best;
  EXPECT_FALSE(reinject_best(mem, best, 3, 3));  // nothing to reinject yet
  update_best(best, episode(0, 4), 0.7, 0);
  mem.push_episode(best.transitions);
  for (std::uint64_t e = 1; e <= 12; ++e) {
    EXPECT_EQ(reinject_best(mem, best, e, 3), e % 3 == 0) << e;
  }
  EXPECT_EQ(mem.size(), 4u + 4u * 4u);
  EXPECT_THROW(reinject_best(mem, best, 3, 0), ConfigError);
}

TEST(Reinjection, EvictsOldestUnderPressure) {
  ReplayMemory mem(6);
  BestEpisode best;
  update_best(best, episode(100, 4), 0.9, 0);
  mem.push_episode(episode(0, 4));
  reinject_best(mem, best, 3, 3);
  ASSERT_EQ(mem.size(), 6u);
  const std::vector<std::size_t> expected{2, 3, 100, 101, 102, 103};
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(mem[i].action, expected[i]);
}

TEST(Minibatch, WithReplacementAndDeterministic) {
  ReplayMemory one(5);
  one.push(tagged(42));
  Rng rng(4);
  const auto batch = sample_minibatch(one, 64, rng);
  ASSERT_EQ(batch.size(), 64u);
  for (const auto& t : batch) EXPECT_EQ(t.action, 42u);

  ReplayMemory mem(10);
  mem.push_episode(episode(0, 10));
  Rng a(5), b(5);
  const auto s1 = sample_minibatch(mem, 32, a);
  const auto s2 = sample_minibatch(mem, 32, b);
  EXPECT_EQ(s1, s2);

  ReplayMemory empty(3);
  EXPECT_THROW(sample_minibatch(empty, 4, rng), EmptyMemoryError);
}

TEST(Minibatch, UniformFrequencies) {
  ReplayMemory mem(10);
  mem.push_episode(episode(0, 10));
  Rng rng(6);
  std::vector<int> counts(10, 0);
  const int draws = 100000;
  for (int i = 0; i < draws / 100; ++i)
    for (const auto& t : sample_minibatch(mem, 100, rng)) ++counts[t.action];
  const double sigma = std::sqrt(draws * 0.1 * 0.9);
  for (int c : counts) EXPECT_NEAR(c, draws * 0.1, 5 * sigma);
}
