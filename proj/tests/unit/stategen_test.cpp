#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "qcal/errors.hpp"
#include "qcal/stategen.hpp"

using namespace qcal;

namespace {

const Complex I(0.0, 1.0);

double norm_defect(const StateVector& s) { return std::abs(s.amplitudes().squaredNorm() - 1.0); }

}  // namespace

TEST(TrainingStates, FirstStateMatchesMatrixProduct) {
  const double theta = kTrainingTheta;
  const StateSet set = gen_training_states(1);
  ASSERT_EQ(set.states.size(), 1u);
  const Complex e = std::exp(I * theta);
  EXPECT_LT(std::abs(set.states[0][0] - (1.0 + e) / 2.0), 1e-15);
  EXPECT_LT(std::abs(set.states[0][1] - (1.0 - e) / 2.0), 1e-15);
  EXPECT_NEAR(theta, 0.16738 * std::numbers::pi, 0.0);
}

TEST(TrainingStates, HundredDistinctNormalizedStates) {
  const StateSet set = gen_training_states(100);
  ASSERT_EQ(set.states.size(), 100u);
  EXPECT_LT(max_pairwise_overlap(set.states), kDistinctOverlapLimit);
  for (const auto& s : set.states) EXPECT_LT(norm_defect(s), 1e-12);
  EXPECT_EQ(set.kind, StateSetKind::Training);
}

TEST(TrainingStates, ZeroAngleIsDegenerate) {
  EXPECT_THROW(gen_training_states(5, 0.0), DegenerateStateSet);
}

TEST(TestingStates, EachStateIsOnePulseFromThePrevious) {
  // two-point sampling: every step must be the closed-form pulse for u = -4 or u = 4
  const double dt = kTestingPulseDuration;
  auto pulse = [&](double u) {
    const double w = std::sqrt(1.0 + u * u);
    ComplexMatrix h(2, 2);
    h << 1.0, u, u, -1.0;
    return ComplexMatrix(std::cos(w * dt) * ComplexMatrix::Identity(2, 2) - I * std::sin(w * dt) / w * h);
  };
  const StateSet set = gen_testing_states(200, 99, dt, ControlSampling::TwoPoint);
  ASSERT_EQ(set.states.size(), 200u);
  StateVector prev = StateVector::basis(2, 0);
  for (const auto& s : set.states) {
    const double lo = (pulse(-4.0) * prev.amplitudes() - s.amplitudes()).norm();
    const double hi = (pulse(4.0) * prev.amplitudes() - s.amplitudes()).norm();
    EXPECT_LT(std::min(lo, hi), 1e-12);
    prev = s;
  }
}

TEST(TestingStates, ZeroControlPulseIsSigmaZPhase) {
  // u = 0 reduces the pulse to diag(e^{-i dt}, e^{i dt})
  const ComplexMatrix u = matexp_hermitian(gates::pauli_z(), kTestingPulseDuration);
  EXPECT_LT(std::abs(u(0, 0) - std::exp(-I * 0.05)), 1e-15);
  EXPECT_LT(std::abs(u(1, 1) - std::exp(I * 0.05)), 1e-15);
  EXPECT_EQ(std::abs(u(0, 1)), 0.0);
}

TEST(TestingStates, DeterministicAndSeedSensitive) {
  const StateSet a = gen_testing_states(500, 7);
  const StateSet b = gen_testing_states(500, 7);
  const StateSet c = gen_testing_states(500, 8);
  EXPECT_EQ(to_json(a), to_json(b));
  EXPECT_NE(to_json(a), to_json(c));
}

TEST(TestingStates, FiftyThousandNormalized) {
  const StateSet set = gen_testing_states(50000, 1);
  ASSERT_EQ(set.states.size(), 50000u);
  double worst = 0.0;
  for (const auto& s : set.states) worst = std::max(worst, norm_defect(s));
  EXPECT_LT(worst, 1e-12);
}

TEST(TestingStates, DisjointFromTrainingStates) {
  const StateSet train = gen_training_states(100);
  const StateSet test = gen_testing_states(2000, 3);
  double worst = 0.0;
  for (const auto& a : train.states)
    for (const auto& b : test.states) worst = std::max(worst, state_fidelity(a, b));
  EXPECT_LT(worst, 1.0);
}

TEST(TwoQubitStates, ProductOfPoolStates) {
  StateSet pool;
  pool.states.push_back(StateVector::basis(2, 0));
  const StateSet set = gen_two_qubit_states(pool, 1, 0);
  ASSERT_EQ(set.states.size(), 1u);
  EXPECT_EQ(set.states[0].dim(), 4u);
  EXPECT_NEAR(std::abs(set.states[0][0]), 1.0, 1e-15);

  const StateSet big = gen_two_qubit_states(gen_testing_states(100, 2), 50, 5);
  ASSERT_EQ(big.states.size(), 50u);
  for (const auto& s : big.states) EXPECT_LT(norm_defect(s), 1e-12);
  EXPECT_THROW(gen_two_qubit_states(StateSet{}, 3, 0), EmptySetError);
}

TEST(StateSetJson, RoundTripIsExact) {
  const StateSet set = gen_testing_states(50, 4);
  const StateSet back = state_set_from_json(to_json(set));
  ASSERT_EQ(back.states.size(), set.states.size());
  for (std::size_t i = 0; i < set.states.size(); ++i) {
    EXPECT_EQ(back.states[i].amplitudes(), set.states[i].amplitudes());
  }
  EXPECT_EQ(to_json(back), to_json(set));
  EXPECT_THROW(state_set_from_json("{\"kind\": 3}"), ParseError);
  EXPECT_THROW(state_set_from_json("not json"), ParseError);
}

TEST(StateSetJson, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "qcal_stategen_test.json";
  const StateSet set = gen_training_states(20);
  save_state_set(set, path);
  EXPECT_EQ(to_json(load_state_set(path)), to_json(set));
  std::filesystem::remove(path);
}
