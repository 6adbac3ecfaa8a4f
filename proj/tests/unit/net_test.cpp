#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "qcal/errors.hpp"
#include "qcal/net.hpp"
#include "qcal/rng.hpp"

using namespace qcal;

namespace {

Architecture arch(std::size_t in, std::size_t hidden, std::size_t out, bool dueling,
                  Activation act = Activation::Relu) {
  return Architecture{in, hidden, out, dueling, act};
}

Batch random_batch(const Architecture& a, std::size_t k, Rng& rng) {
  Batch b;
  b.states.resize(static_cast<Eigen::Index>(a.input_dim), static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < b.states.size(); ++i) b.states.data()[i] = rng.uniform(-1, 1);
  b.targets.resize(static_cast<Eigen::Index>(k));
  for (std::size_t s = 0; s < k; ++s) {
    b.actions.push_back(rng.index(a.output_dim));
    b.targets[static_cast<Eigen::Index>(s)] = rng.uniform(-2, 2);
  }
  return b;
}

/// Largest relative error between the analytic gradient and central differences.
double gradient_check(const QNetwork& net, const Batch& batch, double h = 1e-6) {
  const std::vector<double> analytic = analytic_gradient(net, batch).gradient.flatten();
  std::vector<double> flat = net.parameters().flatten();
  double worst = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    QNetwork plus = net, minus = net;
    std::vector<double> p = flat, m = flat;
    p[i] += h;
    m[i] -= h;
    plus.parameters().assign(p);
    minus.parameters().assign(m);
    const double numeric = (plus.loss(batch) - minus.loss(batch)) / (2 * h);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST(QNetwork, ZeroWeightsGiveZeroQ) {
  const QNetwork net = QNetwork::zeros(arch(3, 5, 4, true));
  const std::vector<double> s{0.3, -0.2, 0.9};
  EXPECT_EQ(net.forward(s), Eigen::VectorXd::Zero(4));
}

TEST(QNetwork, InitialWeightsWithinFanInBound) {
  const QNetwork net(arch(3, 16, 4, true), 5);
  const Parameters& p = net.parameters();
  EXPECT_LE(p.hidden_w.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(3.0));
  EXPECT_LE(p.out_w.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_LE(p.value_w.cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
  EXPECT_TRUE(p.all_finite());
  const QNetwork again(arch(3, 16, 4, true), 5);
  EXPECT_EQ(again.parameters().flatten(), p.flatten());
}

TEST(QNetwork, HandComputedForwardPass) {
  // 2-4-3 ReLU network with hand-set weights
  Parameters p = Parameters::zeros(arch(2, 4, 3, false));
  p.hidden_w << 1, 0, 0, 1, 1, 1, 1, -1;
  p.hidden_b << 0, -0.5, 0.25, 0;
  p.out_w << 1, 0, 0, 0, 0, 1, 1, 0, 1, -1, 1, -1;
  p.out_b << 0.1, 0.2, 0.3;
  const QNetwork net(arch(2, 4, 3, false), p);
  const std::vector<double> s{0.5, 2.0};
  // hidden pre-activations: 0.5, 1.5, 2.75, -1.5 -> relu: 0.5, 1.5, 2.75, 0
  const Eigen::VectorXd q = net.forward(s);
  EXPECT_DOUBLE_EQ(q[0], 0.5 + 0.1);
  EXPECT_DOUBLE_EQ(q[1], 1.5 + 2.75 + 0.2);
  EXPECT_DOUBLE_EQ(q[2], 0.5 - 1.5 + 2.75 + 0.3);
}

TEST(QNetwork, DuelingHeadAddsValueToAdvantage) {
  Rng rng(1);
  const QNetwork net(arch(3, 8, 4, true), 2);
  QNetwork shifted = net;
  shifted.parameters().value_b[0] += 3.25;
  for (int k = 0; k < 20; ++k) {
    const std::vector<double> s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const Eigen::VectorXd a = net.forward(s), b = shifted.forward(s);
    Eigen::Index ia, ib;
    a.maxCoeff(&ia);
    b.maxCoeff(&ib);
    EXPECT_EQ(ia, ib);
    EXPECT_LT((b - a - Eigen::VectorXd::Constant(4, 3.25)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(QNetwork, BatchForwardMatchesSingle) {
  Rng rng(2);
  const QNetwork net(arch(3, 8, 4, true), 3);
  const Batch b = random_batch(net.architecture(), 10, rng);
  const Eigen::MatrixXd q = net.forward_batch(b.states);
  for (Eigen::Index c = 0; c < 10; ++c) {
    const Eigen::VectorXd col = b.states.col(c);
    EXPECT_LT((q.col(c) - net.forward(std::span<const double>(col.data(), 3))).cwiseAbs().maxCoeff(), 1e-14);
  }
  const std::vector<double> wrong{1.0, 2.0};
  EXPECT_THROW(net.forward(wrong), ShapeError);
}

TEST(Gradient, MatchesFiniteDifferences) {
  Rng rng(3);
  for (bool dueling : {false, true}) {
    for (Activation act : {Activation::Relu, Activation::Tanh}) {
      for (int k = 0; k < 10; ++k) {
        const QNetwork net(arch(dueling ? 5 : 3, 8, 4, dueling, act), rng.next_u64());
        const Batch b = random_batch(net.architecture(), 6, rng);
        EXPECT_LT(gradient_check(net, b), 1e-5) << "dueling=" << dueling;
      }
    }
  }
}

TEST(Gradient, ZeroLossGivesZeroGradient) {
  Rng rng(4);
  const QNetwork net(arch(3, 8, 4, true), 1);
  Batch b = random_batch(net.architecture(), 5, rng);
  const Eigen::MatrixXd q = net.forward_batch(b.states);
  for (std::size_t s = 0; s < 5; ++s) b.targets[static_cast<Eigen::Index>(s)] = q(static_cast<Eigen::Index>(b.actions[s]), static_cast<Eigen::Index>(s));
  const GradientReport r = analytic_gradient(net, b);
  EXPECT_EQ(r.loss, 0.0);
  for (double g : r.gradient.flatten()) EXPECT_EQ(g, 0.0);
}

TEST(Gradient, DuelingGradientReachesBothHeads) {
  Rng rng(5);
  const QNetwork net(arch(3, 8, 4, true), 9);
  const Batch b = random_batch(net.architecture(), 8, rng);
  const Parameters g = analytic_gradient(net, b).gradient;
  EXPECT_GT(g.value_w.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(std::abs(g.value_b[0]), 0.0);
  EXPECT_GT(g.out_w.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, RejectsEmptyOrInconsistentBatch) {
  const QNetwork net(arch(3, 4, 2, false), 1);
  Batch empty;
  empty.states.resize(3, 0);
  EXPECT_THROW(analytic_gradient(net, empty), EmptyBatchError);
  Rng rng(1);
  Batch b = random_batch(net.architecture(), 3, rng);
  b.actions[1] = 7;
  EXPECT_THROW(analytic_gradient(net, b), ShapeError);
}

TEST(TrainStep, ScalarLinearNetClosedForm) {
  // 1-1-1 network with ReLU active: q = w2 * relu(w1 x + b1) + b2.
  Parameters p = Parameters::zeros(arch(1, 1, 1, false));
  p.hidden_w << 0.5;
  p.hidden_b << 0.1;
  p.out_w << 2.0;
  p.out_b << -0.3;
  QNetwork net(arch(1, 1, 1, false), p);
  Batch b;
  b.states.resize(1, 1);
  b.states << 2.0;
  b.actions = {0};
  b.targets.resize(1);
  b.targets << 1.0;
  const double h = 0.5 * 2.0 + 0.1;  // 1.1
  const double q = 2.0 * h - 0.3;    // 1.9
  const double err = q - 1.0;        // dL/dq = 2 err
  const double lr = 0.01;
  const double loss = train_step(net, b, lr);
  EXPECT_DOUBLE_EQ(loss, err * err);
  EXPECT_NEAR(net.parameters().out_w(0, 0), 2.0 - lr * 2 * err * h, 1e-15);
  EXPECT_NEAR(net.parameters().out_b[0], -0.3 - lr * 2 * err, 1e-15);
  EXPECT_NEAR(net.parameters().hidden_w(0, 0), 0.5 - lr * 2 * err * 2.0 * 2.0, 1e-15);
  EXPECT_NEAR(net.parameters().hidden_b[0], 0.1 - lr * 2 * err * 2.0, 1e-15);
}

TEST(TrainStep, PerfectPredictionLeavesWeightsUnchanged) {
  Rng rng(6);
  QNetwork net(arch(3, 8, 4, false), 2);
  Batch b = random_batch(net.architecture(), 4, rng);
  const Eigen::MatrixXd q = net.forward_batch(b.states);
  for (std::size_t s = 0; s < 4; ++s) b.targets[static_cast<Eigen::Index>(s)] = q(static_cast<Eigen::Index>(b.actions[s]), static_cast<Eigen::Index>(s));
  const auto before = net.parameters().flatten();
  EXPECT_EQ(train_step(net, b, 0.1), 0.0);
  EXPECT_EQ(net.parameters().flatten(), before);
}

TEST(TrainStep, OverfitsFixedBatch) {
  Rng rng(7);
  QNetwork net(arch(3, 32, 4, true), 4);
  const Batch b = random_batch(net.architecture(), 16, rng);
  const double initial = net.loss(b);
  for (int i = 0; i < 100; ++i) train_step(net, b, 0.02);
  EXPECT_LT(net.loss(b), 0.5 * initial);
}

TEST(TrainStep, GradientDescentWithoutExtrasMatchesTrainStep) {
  Rng rng(8);
  QNetwork a(arch(3, 8, 4, true), 4), b(arch(3, 8, 4, true), 4);
  GradientDescent gd({0.01, 0.0, std::nullopt});
  for (int i = 0; i < 5; ++i) {
    const Batch batch = random_batch(a.architecture(), 8, rng);
    train_step(a, batch, 0.01);
    gd.step(b, batch);
  }
  EXPECT_EQ(a.parameters().flatten(), b.parameters().flatten());
}

TEST(CopyWeights, CopiesWithoutAliasing) {
  Rng rng(9);
  QNetwork src(arch(3, 8, 4, true), 1), dst(arch(3, 8, 4, true), 2);
  copy_weights(src, dst);
  const std::vector<double> s{0.1, 0.2, -0.3};
  EXPECT_EQ(src.forward(s), dst.forward(s));
  const Eigen::VectorXd before = dst.forward(s);
  train_step(src, random_batch(src.architecture(), 4, rng), 0.1);
  EXPECT_EQ(dst.forward(s), before);
  copy_weights(src, dst);
  copy_weights(src, dst);
  EXPECT_EQ(src.forward(s), dst.forward(s));
  QNetwork other(arch(3, 8, 5, true), 1);
  EXPECT_THROW(copy_weights(src, other), ShapeError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(10);
  for (bool dueling : {false, true}) {
    Checkpoint ckpt{QNetwork(arch(2, 16, 2, dueling), 77), 77, 1234, std::size_t{1}};
    const Checkpoint back = checkpoint_from_json(to_json(ckpt));
    EXPECT_EQ(back.network.architecture(), ckpt.network.architecture());
    EXPECT_EQ(back.network.parameters().flatten(), ckpt.network.parameters().flatten());
    EXPECT_EQ(back.seed, 77u);
    EXPECT_EQ(back.episode, 1234u);
    EXPECT_EQ(back.first_action, std::optional<std::size_t>{1});
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> s{rng.uniform(-1, 1), rng.uniform(-1, 1)};
      EXPECT_EQ(back.network.forward(s), ckpt.network.forward(s));
    }
    EXPECT_EQ(to_json(back), to_json(ckpt));
  }
  EXPECT_THROW(checkpoint_from_json("{}"), ParseError);
}

TEST(Checkpoint, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "qcal_net_test_ckpt.json";
  Checkpoint ckpt{QNetwork(arch(2, 8, 2, false), 3), 3, 10, std::nullopt};
  save_checkpoint(ckpt, path);
  const Checkpoint back = load_checkpoint(path);
  EXPECT_EQ(back.network.parameters().flatten(), ckpt.network.parameters().flatten());
  EXPECT_FALSE(back.first_action.has_value());
  std::filesystem::remove(path);
}
