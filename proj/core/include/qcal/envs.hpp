#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcal/qmath.hpp"

namespace qcal {

/// Control field amplitudes (u_0, ..., u_n) applied for one pulse.
using ControlAction = std::vector<double>;
using ActionIndex = std::size_t;
/// Per-training-state fidelities F_1..F_m.
using FidelityVector = std::vector<double>;

/// Finite Cartesian product of allowed control values.
///
/// Values are sorted ascending within each field. Indices enumerate the
/// product lexicographically with the first field most significant, so for
/// fields {-4, 4} x {-4, 4} the order is (-4,-4), (-4,4), (4,-4), (4,4).
class ActionSpace {
 public:
  explicit ActionSpace(std::vector<std::vector<double>> allowed_values);

  /// Every field takes values from the same set.
  static ActionSpace uniform(std::size_t fields, std::vector<double> values);

  std::size_t field_count() const { return allowed_.size(); }
  std::size_t size() const { return size_; }
  std::span<const double> allowed(std::size_t field) const { return allowed_.at(field); }

  ControlAction action(ActionIndex index) const;
  /// Throws ActionShapeError when the action is not an element of the space.
  ActionIndex index_of(const ControlAction& action) const;
  bool contains(const ControlAction& action) const;

  bool operator==(const ActionSpace&) const = default;

 private:
  std::vector<std::vector<double>> allowed_;
  std::size_t size_ = 1;
};

enum class TaskKind { GateDesign, ComposedGateCalibration, CircuitCalibration };
enum class HamiltonianModel { SingleQubit, TwoQubit };
/// Fixed circuit surrounding the calibrated gate U.
enum class Circuit {
  Direct,   // U itself
  BitFlip,  // U . Z . U  against  H . Z . H
  Bell,     // U . (H x I)  against  CNOT . (H x I)
};

struct TaskConfig {
  std::string name;
  TaskKind kind = TaskKind::GateDesign;
  int qubits = 1;
  std::size_t horizon = 1;
  double total_time = 1.0;
  HamiltonianModel model = HamiltonianModel::SingleQubit;
  /// When set, u_0 of the single-qubit Hamiltonian is pinned and the
  /// action controls u_1 only.
  std::optional<double> fixed_u0;
  ActionSpace actions = ActionSpace::uniform(1, {-4.0, 4.0});
  /// Ideal gate the controlled pulse sequence should implement.
  ComplexMatrix target;
  Circuit circuit = Circuit::Direct;
  std::vector<StateVector> training_states;

  double dt() const { return total_time / static_cast<double>(horizon); }
  /// Throws ConfigError / DimensionError on inconsistent settings.
  void validate() const;
};

inline constexpr double kControlBound = 4.0;

namespace tasks {

TaskConfig hadamard_design(std::size_t horizon = 28, double total_time = 1.0);
TaskConfig cnot_design(std::size_t horizon = 38, double total_time = 1.1);
/// Calibrate U to HTH (rotation about x by pi/4).
TaskConfig tx_calibration(std::vector<StateVector> training_states, std::size_t horizon = 28,
                          double total_time = 1.0);
/// Calibrate U to S H T H S^dagger (rotation about y by pi/4).
TaskConfig ty_calibration(std::vector<StateVector> training_states, std::size_t horizon = 28,
                          double total_time = 1.0);
TaskConfig bitflip_calibration(std::vector<StateVector> training_states, std::size_t horizon = 28,
                               double total_time = 1.0);
TaskConfig bell_calibration(std::vector<StateVector> training_states, std::size_t horizon = 38,
                            double total_time = 1.1);

ComplexMatrix tx_target();
ComplexMatrix ty_target();

}  // namespace tasks

/// H = u_0 sigma_z + u_1 sigma_x. With fix_u0 the action holds u_1 only.
ComplexMatrix build_single_qubit_hamiltonian(const ControlAction& a,
                                             std::optional<double> fix_u0 = std::nullopt);

/// H = S_z + u_0 S_x^1 + u_1 S_x^2 + u_2 S_y^1 + u_3 S_y^2.
ComplexMatrix build_two_qubit_hamiltonian(const ControlAction& a);

ComplexMatrix build_hamiltonian(const TaskConfig& cfg, const ControlAction& a);

struct GateDesignResult {
  ComplexMatrix final_unitary;
  double fidelity = 0.0;
};

/// U_f = U(A_N) ... U(A_1) U_0 with U_0 = I, and its gate fidelity to cfg.target.
GateDesignResult evaluate_gate_design(std::span<const ControlAction> protocol,
                                      const TaskConfig& cfg);

/// F_j = |<U_target psi_j | U_f psi_j>|^2 over the given states.
FidelityVector evaluate_composed_gate(std::span<const ControlAction> protocol,
                                      const TaskConfig& cfg,
                                      std::span<const StateVector> states);

/// F_j of the circuit with U_f in the calibrated slot(s) against the ideal circuit.
FidelityVector evaluate_circuit_calibration(std::span<const ControlAction> protocol,
                                            const TaskConfig& cfg,
                                            std::span<const StateVector> states);

/// Throws EmptySetError on an empty vector.
double min_fidelity(const FidelityVector& fv);

/// Simulator for one task: caches the per-action pulse propagators and the
/// ideal circuit outputs for the training states.
///
/// This is the inspection side of an environment. The learning agent never
/// sees it directly; it talks to an Environment instead.
class Task {
 public:
  explicit Task(TaskConfig cfg);

  const TaskConfig& config() const { return cfg_; }
  const ActionSpace& actions() const { return cfg_.actions; }
  std::size_t horizon() const { return cfg_.horizon; }
  const ComplexMatrix& step_unitary(ActionIndex a) const { return steps_.at(a); }

  ComplexMatrix final_unitary(std::span<const ActionIndex> protocol) const;
  /// Operator the whole circuit applies when U sits in the calibrated slot.
  ComplexMatrix circuit_unitary(const ComplexMatrix& u) const;
  const ComplexMatrix& ideal_circuit() const { return ideal_circuit_; }

  /// Gate fidelity for design tasks; min over training-state fidelities otherwise.
  double objective(const ComplexMatrix& uf) const;
  /// Training-state fidelities (empty for design tasks).
  FidelityVector training_fidelities(const ComplexMatrix& uf) const;
  /// Fidelities of circuit outputs on arbitrary input states.
  FidelityVector state_fidelities(const ComplexMatrix& uf,
                                  std::span<const StateVector> states) const;

 private:
  TaskConfig cfg_;
  std::vector<ComplexMatrix> steps_;
  ComplexMatrix ideal_circuit_;
  std::vector<ComplexVector> ideal_outputs_;
};

/// End-of-episode information returned to the agent.
struct Feedback {
  /// F_f for gate design, min(F) for calibration tasks.
  double fidelity = 0.0;
  FidelityVector per_state;
};

/// Agent-facing black box: takes a complete protocol, returns only fidelities.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const ActionSpace& actions() const = 0;
  virtual std::size_t horizon() const = 0;
  virtual Feedback evaluate(std::span<const ActionIndex> protocol) const = 0;
};

class BlackBoxEnvironment final : public Environment {
 public:
  explicit BlackBoxEnvironment(std::shared_ptr<const Task> task);

  const ActionSpace& actions() const override { return task_->actions(); }
  std::size_t horizon() const override { return task_->horizon(); }
  Feedback evaluate(std::span<const ActionIndex> protocol) const override;

 private:
  std::shared_ptr<const Task> task_;
};

}  // namespace qcal
