#include "qcal/qmath.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "qcal/errors.hpp"

namespace qcal {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

}  // namespace

StateVector::StateVector(ComplexVector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (!is_power_of_two(dim())) {
    throw DimensionError("state dimension " + std::to_string(dim()) + " is not a power of two");
  }
  const double norm2 = amplitudes_.squaredNorm();
  if (!std::isfinite(norm2) || std::abs(norm2 - 1.0) > kNormTolerance) {
    throw NormalizationError("state is not normalized: |psi|^2 = " + std::to_string(norm2));
  }
}

StateVector StateVector::normalized(ComplexVector amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NormalizationError("cannot normalize a zero or non-finite vector");
  }
  amplitudes /= norm;
  return StateVector(std::move(amplitudes));
}

StateVector StateVector::basis(std::size_t dim, std::size_t index) {
  if (index >= dim) throw DimensionError("basis index out of range");
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return StateVector(std::move(v));
}

StateVector StateVector::evolved(const ComplexMatrix& unitary) const {
  if (unitary.rows() != unitary.cols() || static_cast<std::size_t>(unitary.cols()) != dim()) {
    throw DimensionError("operator and state dimensions differ");
  }
  return normalized(unitary * amplitudes_);
}

bool is_hermitian(const ComplexMatrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return max_abs_diff(m, m.adjoint()) < tol;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

double unitarity_defect(const ComplexMatrix& u) {
  const ComplexMatrix id = ComplexMatrix::Identity(u.rows(), u.cols());
  return max_abs_diff(u.adjoint() * u, id);
}

ComplexMatrix matexp_hermitian(const ComplexMatrix& h, double scale) {
  if (h.rows() != h.cols() || (h.rows() != 2 && h.rows() != 4)) {
    throw DimensionError("matexp_hermitian supports 2x2 and 4x4 matrices, got " +
                         std::to_string(h.rows()) + "x" + std::to_string(h.cols()));
  }
  if (!h.allFinite()) throw HermiticityViolation("matrix has non-finite entries");
  if (!is_hermitian(h)) throw HermiticityViolation("matrix is not Hermitian");

  // Symmetrize so the solver sees an exactly Hermitian input.
  const Eigen::MatrixXcd herm = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm);
  if (solver.info() != Eigen::Success) {
    throw HermiticityViolation("eigendecomposition did not converge");
  }
  const Eigen::VectorXd& w = solver.eigenvalues();
  const Eigen::MatrixXcd& v = solver.eigenvectors();
  Eigen::VectorXcd phases(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    phases[k] = std::polar(1.0, -scale * w[k]);
  }
  return v * phases.asDiagonal() * v.adjoint();
}

ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double gate_fidelity(const ComplexMatrix& uf, const ComplexMatrix& ut, int qubits) {
  if (qubits < 1 || qubits > 16) throw DimensionError("qubit count out of range");
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  if (uf.rows() != dim || uf.cols() != dim || ut.rows() != dim || ut.cols() != dim) {
    throw DimensionError("gate_fidelity: matrices must both be " + std::to_string(dim) + "x" +
                         std::to_string(dim));
  }
  // Tr(A^dagger B) = sum_ij conj(A_ij) B_ij
  Complex trace{0.0, 0.0};
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) trace += std::conj(uf(i, j)) * ut(i, j);
  }
  const double f = std::norm(trace / static_cast<double>(dim));
  return std::clamp(f, 0.0, 1.0);
}

double state_fidelity(const StateVector& psi_f, const StateVector& psi_t) {
  if (psi_f.dim() != psi_t.dim()) throw DimensionError("state_fidelity: dimension mismatch");
  const Complex overlap = psi_f.amplitudes().dot(psi_t.amplitudes());  // conjugates the left side
  return std::clamp(std::norm(overlap), 0.0, 1.0);
}

namespace gates {

using namespace std::complex_literals;

ComplexMatrix identity(std::size_t dim) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
}

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

ComplexMatrix pauli_y() {
  ComplexMatrix m(2, 2);
  m << 0.0, -1i, 1i, 0.0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

ComplexMatrix hadamard() {
  const double r = 1.0 / std::numbers::sqrt2;
  ComplexMatrix m(2, 2);
  m << r, r, r, -r;
  return m;
}

ComplexMatrix phase(double theta) {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, std::polar(1.0, theta);
  return m;
}

ComplexMatrix t_gate() { return phase(std::numbers::pi / 4.0); }

ComplexMatrix s_gate() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, 1i;
  return m;
}

ComplexMatrix s_dagger() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1i;
  return m;
}

ComplexMatrix cnot() {
  ComplexMatrix m = ComplexMatrix::Zero(4, 4);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;
  m(2, 3) = 1.0;
  m(3, 2) = 1.0;
  return m;
}

}  // namespace gates

ComplexMatrix standard_gate(std::string_view name) {
  if (name == "H") return gates::hadamard();
  if (name == "T") return gates::t_gate();
  if (name == "S") return gates::s_gate();
  if (name == "S_dagger" || name == "Sdg") return gates::s_dagger();
  if (name == "X") return gates::pauli_x();
  if (name == "Y") return gates::pauli_y();
  if (name == "Z") return gates::pauli_z();
  if (name == "I") return gates::identity(2);
  if (name == "CNOT") return gates::cnot();

  constexpr std::string_view prefix = "Phase(";
  if (name.starts_with(prefix) && name.ends_with(")")) {
    const std::string arg(name.substr(prefix.size(), name.size() - prefix.size() - 1));
    try {
      std::size_t used = 0;
      const double theta = std::stod(arg, &used);
      if (used == arg.size()) return gates::phase(theta);
    } catch (const std::exception&) {
    }
  }
  throw UnknownGate("unknown gate '" + std::string(name) + "'");
}

}  // namespace qcal
