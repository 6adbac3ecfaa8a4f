#pragma once

#include <complex>
#include <cstddef>
#include <string_view>

#include <Eigen/Dense>

namespace qcal {

using Complex = std::complex<double>;
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ComplexVector = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

inline constexpr double kHermiticityTolerance = 1e-10;

/// A normalized pure state of dimension 2^d.
class StateVector {
 public:
  static constexpr double kNormTolerance = 1e-12;

  /// Throws DimensionError unless the size is a power of two and
  /// NormalizationError unless the squared norm is 1 within kNormTolerance.
  explicit StateVector(ComplexVector amplitudes);

  /// Rescales to unit norm first; only a zero vector is rejected.
  static StateVector normalized(ComplexVector amplitudes);
  static StateVector basis(std::size_t dim, std::size_t index);

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes_.size()); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  const Complex& operator[](std::size_t i) const { return amplitudes_[static_cast<Eigen::Index>(i)]; }

  /// U|psi>, renormalized to absorb rounding drift.
  StateVector evolved(const ComplexMatrix& unitary) const;

 private:
  ComplexVector amplitudes_;
};

/// exp(-i * scale * H) for Hermitian H of dimension 2 or 4, computed from
/// the eigendecomposition H = V diag(w) V^dagger.
ComplexMatrix matexp_hermitian(const ComplexMatrix& h, double scale);

/// Kronecker product A (x) B.
ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b);

/// |Tr(Uf^dagger UT) / 2^d|^2, clamped to [0, 1].
double gate_fidelity(const ComplexMatrix& uf, const ComplexMatrix& ut, int qubits);

/// |<psi_f|psi_T>|^2, clamped to [0, 1].
double state_fidelity(const StateVector& psi_f, const StateVector& psi_t);

bool is_hermitian(const ComplexMatrix& m, double tol = kHermiticityTolerance);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
/// max |(U^dagger U - I)_ij|
double unitarity_defect(const ComplexMatrix& u);

namespace gates {

ComplexMatrix identity(std::size_t dim = 2);
ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
ComplexMatrix hadamard();
ComplexMatrix t_gate();
ComplexMatrix s_gate();
ComplexMatrix s_dagger();
ComplexMatrix phase(double theta);
ComplexMatrix cnot();

}  // namespace gates

/// Looks up a gate by name: H, T, S, S_dagger (alias Sdg), Z, X, Y, I, CNOT,
/// or Phase(<theta>). Throws UnknownGate otherwise.
ComplexMatrix standard_gate(std::string_view name);

}  // namespace qcal
