#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../support/oracles.hpp"
#include "qcal/errors.hpp"
#include "qcal/qmath.hpp"
#include "qcal/rng.hpp"

using namespace qcal;
using qcal::testing::kron;
using qcal::testing::mat2;
using qcal::testing::taylor_expm;
using qcal::testing::taylor_expm_scaled;

namespace {

constexpr double kPi = std::numbers::pi;
const Complex I(0.0, 1.0);

ComplexMatrix random_hermitian(std::size_t dim, Rng& rng, double scale = 1.0) {
  ComplexMatrix a(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      a(i, j) = Complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale));
  return (a + a.adjoint()) * 0.5;
}

ComplexMatrix rx(double theta) {
  return mat2(std::cos(theta / 2), -I * std::sin(theta / 2), -I * std::sin(theta / 2), std::cos(theta / 2));
}

ComplexMatrix ry(double theta) {
  return mat2(std::cos(theta / 2), -std::sin(theta / 2), std::sin(theta / 2), std::cos(theta / 2));
}

}  // namespace

TEST(Matexp, ZeroHamiltonianGivesIdentity) {
  const ComplexMatrix u = matexp_hermitian(ComplexMatrix::Zero(2, 2), 0.5);
  EXPECT_LT(max_abs_diff(u, gates::identity()), 1e-15);
}

TEST(Matexp, SigmaZIsDiagonalPhase) {
  for (double t : {0.0, 0.1, 1.0, 2.5, -0.7}) {
    const ComplexMatrix u = matexp_hermitian(gates::pauli_z(), t);
    const ComplexMatrix expected = mat2(std::exp(-I * t), 0.0, 0.0, std::exp(I * t));
    EXPECT_LT(max_abs_diff(u, expected), 1e-14) << "t=" << t;
  }
}

TEST(Matexp, HadamardPulseMatchesTaylorSeries) {
  const ComplexMatrix h = gates::pauli_z() + 4.0 * gates::pauli_x();
  const ComplexMatrix u = matexp_hermitian(h, 1.0 / 28.0);
  EXPECT_LT(max_abs_diff(u, taylor_expm(h, 1.0 / 28.0, 20)), 1e-9);
}

TEST(Matexp, PauliVectorClosedForm) {
  // exp(-i t n.sigma) = cos t I - i sin t n.sigma for a unit vector n
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    double nx = rng.uniform(-1, 1), ny = rng.uniform(-1, 1), nz = rng.uniform(-1, 1);
    const double len = std::sqrt(nx * nx + ny * ny + nz * nz);
    nx /= len, ny /= len, nz /= len;
    const double t = rng.uniform(-3, 3);
    const ComplexMatrix ns = nx * gates::pauli_x() + ny * gates::pauli_y() + nz * gates::pauli_z();
    const ComplexMatrix expected = std::cos(t) * gates::identity() - I * std::sin(t) * ns;
    EXPECT_LT(max_abs_diff(matexp_hermitian(ns, t), expected), 1e-12);
  }
}

TEST(Matexp, RandomFourByFourMatchesScaledTaylor) {
  Rng rng(5);
  for (int k = 0; k < 100; ++k) {
    const ComplexMatrix h = random_hermitian(4, rng, 4.0);
    const double t = rng.uniform(-1.0, 1.0);
    EXPECT_LT(max_abs_diff(matexp_hermitian(h, t), taylor_expm_scaled(h, t)), 1e-10);
  }
}

TEST(Matexp, UnitaryAndGroupProperty) {
  Rng rng(6);
  for (int k = 0; k < 500; ++k) {
    const std::size_t dim = k % 2 ? 4 : 2;
    const ComplexMatrix h = random_hermitian(dim, rng, 5.0);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const ComplexMatrix ua = matexp_hermitian(h, a);
    EXPECT_LT(unitarity_defect(ua), 1e-10);
    const ComplexMatrix prod = ua * matexp_hermitian(h, b);
    EXPECT_LT(max_abs_diff(prod, matexp_hermitian(h, a + b)), 1e-9);
  }
}

TEST(Matexp, RejectsNonHermitian) {
  ComplexMatrix m = gates::pauli_x();
  m(0, 1) = 2.0;
  EXPECT_THROW(matexp_hermitian(m, 1.0), HermiticityViolation);
}

TEST(Matexp, RejectsUnsupportedDimension) {
  EXPECT_THROW(matexp_hermitian(ComplexMatrix::Identity(3, 3), 1.0), DimensionError);
  EXPECT_THROW(matexp_hermitian(ComplexMatrix::Identity(8, 8), 1.0), DimensionError);
}

TEST(Tensor, IdentityAndPauliProducts) {
  EXPECT_EQ(max_abs_diff(tensor(gates::identity(), gates::identity()), ComplexMatrix::Identity(4, 4)), 0.0);
  const ComplexMatrix zz = tensor(gates::pauli_z(), gates::pauli_z());
  ComplexMatrix diag = ComplexMatrix::Zero(4, 4);
  diag.diagonal() << 1.0, -1.0, -1.0, 1.0;
  EXPECT_EQ(max_abs_diff(zz, diag), 0.0);
}

TEST(Tensor, SigmaXOnFirstQubitHasOffDiagonalIdentityBlocks) {
  const ComplexMatrix sx1 = tensor(gates::pauli_x(), gates::identity());
  EXPECT_EQ(max_abs_diff(sx1.block(0, 0, 2, 2), ComplexMatrix::Zero(2, 2)), 0.0);
  EXPECT_EQ(max_abs_diff(sx1.block(2, 2, 2, 2), ComplexMatrix::Zero(2, 2)), 0.0);
  EXPECT_EQ(max_abs_diff(sx1.block(0, 2, 2, 2), gates::identity()), 0.0);
  EXPECT_EQ(max_abs_diff(sx1.block(2, 0, 2, 2), gates::identity()), 0.0);
}

TEST(Tensor, MatchesKroneckerOracleAndIsAssociative) {
  Rng rng(8);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix a = random_hermitian(2, rng), b = random_hermitian(2, rng),
                        c = random_hermitian(2, rng);
    EXPECT_EQ(max_abs_diff(tensor(a, b), kron(a, b)), 0.0);
    EXPECT_LT(max_abs_diff(tensor(tensor(a, b), c), tensor(a, tensor(b, c))), 1e-15);
  }
}

TEST(GateFidelity, KnownValues) {
  EXPECT_NEAR(gate_fidelity(gates::hadamard(), gates::hadamard(), 1), 1.0, 1e-15);
  EXPECT_NEAR(gate_fidelity(gates::identity(), gates::hadamard(), 1), 0.0, 1e-15);
  const ComplexMatrix phased = std::exp(I * 0.7) * gates::cnot();
  EXPECT_NEAR(gate_fidelity(phased, gates::cnot(), 2), 1.0, 1e-12);
}

TEST(GateFidelity, RangeAndGlobalPhaseInvariance) {
  Rng rng(9);
  for (int k = 0; k < 1000; ++k) {
    const std::size_t dim = k % 2 ? 4 : 2;
    const int qubits = dim == 4 ? 2 : 1;
    const ComplexMatrix u = matexp_hermitian(random_hermitian(dim, rng, 3.0), 1.0);
    const ComplexMatrix v = matexp_hermitian(random_hermitian(dim, rng, 3.0), 1.0);
    const double f = gate_fidelity(u, v, qubits);
    EXPECT_GE(f, 0.0);
    EXPECT_LE(f, 1.0 + 1e-12);
    const double phi = rng.uniform(-kPi, kPi);
    EXPECT_NEAR(gate_fidelity(std::exp(I * phi) * u, v, qubits), f, 1e-12);
  }
}

TEST(StateFidelity, KnownValues) {
  const StateVector zero = StateVector::basis(2, 0);
  const StateVector one = StateVector::basis(2, 1);
  ComplexVector plus(2);
  plus << 1.0, 1.0;
  const StateVector p = StateVector::normalized(plus);
  EXPECT_DOUBLE_EQ(state_fidelity(zero, zero), 1.0);
  EXPECT_DOUBLE_EQ(state_fidelity(zero, one), 0.0);
  EXPECT_NEAR(state_fidelity(zero, p), 0.5, 1e-15);
}

TEST(StateVector, RejectsBadInput) {
  ComplexVector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(StateVector{v}, NormalizationError);
  ComplexVector w(3);
  w << 1.0, 0.0, 0.0;
  EXPECT_THROW(StateVector{w}, DimensionError);
  EXPECT_THROW(StateVector::normalized(ComplexVector::Zero(2)), NormalizationError);
}

TEST(Gates, HadamardIsInvolution) {
  EXPECT_LT(max_abs_diff(gates::hadamard() * gates::hadamard(), gates::identity()), 1e-15);
}

TEST(Gates, HthIsRxQuarterTurn) {
  const ComplexMatrix hth = gates::hadamard() * gates::t_gate() * gates::hadamard();
  EXPECT_NEAR(gate_fidelity(hth, rx(kPi / 4), 1), 1.0, 1e-12);
}

TEST(Gates, ShthsDaggerIsRyQuarterTurn) {
  const ComplexMatrix g = gates::s_gate() * gates::hadamard() * gates::t_gate() * gates::hadamard() *
                          gates::s_dagger();
  EXPECT_NEAR(gate_fidelity(g, ry(kPi / 4), 1), 1.0, 1e-12);
}

TEST(Gates, StandardGateLookup) {
  EXPECT_EQ(max_abs_diff(standard_gate("H"), gates::hadamard()), 0.0);
  EXPECT_EQ(max_abs_diff(standard_gate("CNOT"), gates::cnot()), 0.0);
  EXPECT_EQ(max_abs_diff(standard_gate("Sdg"), gates::s_dagger()), 0.0);
  EXPECT_LT(max_abs_diff(standard_gate("Phase(0.5)"), mat2(1.0, 0.0, 0.0, std::exp(I * 0.5))), 1e-15);
  EXPECT_LT(max_abs_diff(gates::t_gate(), mat2(1.0, 0.0, 0.0, std::exp(I * (kPi / 4)))), 1e-15);
  EXPECT_THROW(standard_gate("Q"), UnknownGate);
}

TEST(Gates, CnotFlipsTargetWhenControlSet) {
  const StateVector in = StateVector::basis(4, 2);  // |10>
  const StateVector out = in.evolved(gates::cnot());
  EXPECT_NEAR(std::abs(out[3]), 1.0, 1e-15);
}
