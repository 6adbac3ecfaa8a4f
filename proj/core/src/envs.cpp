#include "qcal/envs.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qcal/errors.hpp"

namespace qcal {

// ---------------------------------------------------------------------------
// ActionSpace

ActionSpace::ActionSpace(std::vector<std::vector<double>> allowed_values)
    : allowed_(std::move(allowed_values)) {
  if (allowed_.empty()) throw ActionShapeError("action space needs at least one control field");
  for (auto& values : allowed_) {
    if (values.empty()) throw ActionShapeError("control field with no allowed values");
    for (double v : values) {
      if (!std::isfinite(v)) throw ActionShapeError("non-finite control value");
    }
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    size_ *= values.size();
  }
}

ActionSpace ActionSpace::uniform(std::size_t fields, std::vector<double> values) {
  return ActionSpace(std::vector<std::vector<double>>(fields, std::move(values)));
}

ControlAction ActionSpace::action(ActionIndex index) const {
  if (index >= size_) {
    throw ActionShapeError("action index " + std::to_string(index) + " out of range (size " +
                           std::to_string(size_) + ")");
  }
  ControlAction out(allowed_.size());
  for (std::size_t f = allowed_.size(); f-- > 0;) {
    const std::size_t count = allowed_[f].size();
    out[f] = allowed_[f][index % count];
    index /= count;
  }
  return out;
}

ActionIndex ActionSpace::index_of(const ControlAction& action) const {
  if (action.size() != allowed_.size()) {
    throw ActionShapeError("action has " + std::to_string(action.size()) + " fields, expected " +
                           std::to_string(allowed_.size()));
  }
  ActionIndex index = 0;
  for (std::size_t f = 0; f < allowed_.size(); ++f) {
    const auto& values = allowed_[f];
    const auto it = std::find(values.begin(), values.end(), action[f]);
    if (it == values.end()) {
      throw ActionShapeError("control value " + std::to_string(action[f]) +
                             " is not allowed for field " + std::to_string(f));
    }
    index = index * values.size() + static_cast<std::size_t>(it - values.begin());
  }
  return index;
}

bool ActionSpace::contains(const ControlAction& action) const {
  if (action.size() != allowed_.size()) return false;
  for (std::size_t f = 0; f < allowed_.size(); ++f) {
    const auto& values = allowed_[f];
    if (std::find(values.begin(), values.end(), action[f]) == values.end()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// TaskConfig

namespace {

std::size_t expected_field_count(const TaskConfig& cfg) {
  if (cfg.model == HamiltonianModel::TwoQubit) return 4;
  return cfg.fixed_u0 ? 1 : 2;
}

}  // namespace

void TaskConfig::validate() const {
  if (horizon < 1) throw ConfigError("horizon N must be at least 1");
  if (!(total_time > 0.0) || !std::isfinite(total_time)) {
    throw ConfigError("total evolution time T must be positive");
  }
  if (qubits != 1 && qubits != 2) throw ConfigError("only 1- and 2-qubit tasks are supported");
  const int model_qubits = model == HamiltonianModel::SingleQubit ? 1 : 2;
  if (model_qubits != qubits) throw ConfigError("Hamiltonian model does not match qubit count");
  if (model == HamiltonianModel::TwoQubit && fixed_u0) {
    throw ConfigError("fixed u_0 applies to the single-qubit Hamiltonian only");
  }
  if (actions.field_count() != expected_field_count(*this)) {
    throw ConfigError("action space has " + std::to_string(actions.field_count()) +
                      " fields, Hamiltonian expects " + std::to_string(expected_field_count(*this)));
  }
  const Eigen::Index dim = Eigen::Index{1} << qubits;
  if (target.rows() != dim || target.cols() != dim) {
    throw DimensionError("target gate must be " + std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (unitarity_defect(target) > 1e-9) throw ConfigError("target gate is not unitary");

  switch (circuit) {
    case Circuit::Direct:
      if (kind == TaskKind::CircuitCalibration) {
        throw ConfigError("circuit calibration needs a BitFlip or Bell circuit");
      }
      break;
    case Circuit::BitFlip:
      if (qubits != 1) throw ConfigError("bit-flip circuit is single-qubit");
      break;
    case Circuit::Bell:
      if (qubits != 2) throw ConfigError("Bell circuit is two-qubit");
      break;
  }
  if (kind != TaskKind::CircuitCalibration && circuit != Circuit::Direct) {
    throw ConfigError("surrounding circuits apply to circuit calibration only");
  }
  if (kind != TaskKind::GateDesign) {
    if (training_states.empty()) throw EmptySetError("calibration task needs training states");
    for (const auto& s : training_states) {
      if (s.dim() != static_cast<std::size_t>(dim)) {
        throw DimensionError("training state dimension does not match task qubits");
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Presets

namespace tasks {

namespace {

TaskConfig single_qubit_base(std::string name, std::size_t horizon, double total_time) {
  TaskConfig cfg;
  cfg.name = std::move(name);
  cfg.qubits = 1;
  cfg.horizon = horizon;
  cfg.total_time = total_time;
  cfg.model = HamiltonianModel::SingleQubit;
  cfg.fixed_u0 = 1.0;
  cfg.actions = ActionSpace::uniform(1, {-kControlBound, kControlBound});
  return cfg;
}

TaskConfig two_qubit_base(std::string name, std::size_t horizon, double total_time) {
  TaskConfig cfg;
  cfg.name = std::move(name);
  cfg.qubits = 2;
  cfg.horizon = horizon;
  cfg.total_time = total_time;
  cfg.model = HamiltonianModel::TwoQubit;
  cfg.actions = ActionSpace::uniform(4, {-kControlBound, kControlBound});
  return cfg;
}

}  // namespace

ComplexMatrix tx_target() {
  return gates::hadamard() * gates::t_gate() * gates::hadamard();
}

ComplexMatrix ty_target() {
  return gates::s_gate() * gates::hadamard() * gates::t_gate() * gates::hadamard() *
         gates::s_dagger();
}

TaskConfig hadamard_design(std::size_t horizon, double total_time) {
  TaskConfig cfg = single_qubit_base("hadamard", horizon, total_time);
  cfg.kind = TaskKind::GateDesign;
  cfg.target = gates::hadamard();
  return cfg;
}

TaskConfig cnot_design(std::size_t horizon, double total_time) {
  TaskConfig cfg = two_qubit_base("cnot", horizon, total_time);
  cfg.kind = TaskKind::GateDesign;
  cfg.target = gates::cnot();
  return cfg;
}

TaskConfig tx_calibration(std::vector<StateVector> training_states, std::size_t horizon,
                          double total_time) {
  TaskConfig cfg = single_qubit_base("tx", horizon, total_time);
  cfg.kind = TaskKind::ComposedGateCalibration;
  cfg.target = tx_target();
  cfg.training_states = std::move(training_states);
  return cfg;
}

TaskConfig ty_calibration(std::vector<StateVector> training_states, std::size_t horizon,
                          double total_time) {
  TaskConfig cfg = single_qubit_base("ty", horizon, total_time);
  cfg.kind = TaskKind::ComposedGateCalibration;
  cfg.target = ty_target();
  cfg.training_states = std::move(training_states);
  return cfg;
}

TaskConfig bitflip_calibration(std::vector<StateVector> training_states, std::size_t horizon,
                               double total_time) {
  TaskConfig cfg = single_qubit_base("bitflip", horizon, total_time);
  cfg.kind = TaskKind::CircuitCalibration;
  cfg.circuit = Circuit::BitFlip;
  cfg.target = gates::hadamard();
  cfg.training_states = std::move(training_states);
  return cfg;
}

TaskConfig bell_calibration(std::vector<StateVector> training_states, std::size_t horizon,
                            double total_time) {
  TaskConfig cfg = two_qubit_base("bell", horizon, total_time);
  cfg.kind = TaskKind::CircuitCalibration;
  cfg.circuit = Circuit::Bell;
  cfg.target = gates::cnot();
  cfg.training_states = std::move(training_states);
  return cfg;
}

}  // namespace tasks

// ---------------------------------------------------------------------------
// Hamiltonians

ComplexMatrix build_single_qubit_hamiltonian(const ControlAction& a, std::optional<double> fix_u0) {
  const std::size_t expected = fix_u0 ? 1 : 2;
  if (a.size() != expected) {
    throw ActionShapeError("single-qubit Hamiltonian expects " + std::to_string(expected) +
                           " control field(s), got " + std::to_string(a.size()));
  }
  const double u0 = fix_u0 ? *fix_u0 : a[0];
  const double u1 = fix_u0 ? a[0] : a[1];
  return u0 * gates::pauli_z() + u1 * gates::pauli_x();
}

ComplexMatrix build_two_qubit_hamiltonian(const ControlAction& a) {
  if (a.size() != 4) {
    throw ActionShapeError("two-qubit Hamiltonian expects 4 control fields, got " +
                           std::to_string(a.size()));
  }
  static const ComplexMatrix id = gates::identity(2);
  static const ComplexMatrix sz = tensor(gates::pauli_z(), gates::pauli_z());
  static const ComplexMatrix sx1 = tensor(gates::pauli_x(), id);
  static const ComplexMatrix sx2 = tensor(id, gates::pauli_x());
  static const ComplexMatrix sy1 = tensor(gates::pauli_y(), id);
  static const ComplexMatrix sy2 = tensor(id, gates::pauli_y());
  return sz + a[0] * sx1 + a[1] * sx2 + a[2] * sy1 + a[3] * sy2;
}

ComplexMatrix build_hamiltonian(const TaskConfig& cfg, const ControlAction& a) {
  if (cfg.model == HamiltonianModel::TwoQubit) return build_two_qubit_hamiltonian(a);
  return build_single_qubit_hamiltonian(a, cfg.fixed_u0);
}

// ---------------------------------------------------------------------------
// Direct (uncached) evaluation

namespace {

void check_protocol_length(std::size_t got, std::size_t horizon) {
  if (got != horizon) {
    throw ProtocolLengthError("protocol has " + std::to_string(got) + " pulses, task horizon is " +
                              std::to_string(horizon));
  }
}

ComplexMatrix circuit_of(const TaskConfig& cfg, const ComplexMatrix& u) {
  switch (cfg.circuit) {
    case Circuit::Direct:
      return u;
    case Circuit::BitFlip:
      return u * gates::pauli_z() * u;
    case Circuit::Bell:
      return u * tensor(gates::hadamard(), gates::identity(2));
  }
  return u;
}

FidelityVector output_fidelities(const ComplexMatrix& actual, const ComplexMatrix& ideal,
                                 std::span<const StateVector> states) {
  FidelityVector out;
  out.reserve(states.size());
  for (const auto& psi : states) {
    if (psi.dim() != static_cast<std::size_t>(actual.cols())) {
      throw DimensionError("input state dimension does not match the circuit");
    }
    out.push_back(state_fidelity(psi.evolved(actual), psi.evolved(ideal)));
  }
  return out;
}

}  // namespace

GateDesignResult evaluate_gate_design(std::span<const ControlAction> protocol,
                                      const TaskConfig& cfg) {
  check_protocol_length(protocol.size(), cfg.horizon);
  const Eigen::Index dim = Eigen::Index{1} << cfg.qubits;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (const auto& action : protocol) {
    if (!cfg.actions.contains(action)) {
      throw ActionShapeError("protocol contains an action outside the declared action space");
    }
    u = matexp_hermitian(build_hamiltonian(cfg, action), cfg.dt()) * u;
  }
  const double f = gate_fidelity(u, cfg.target, cfg.qubits);
  return {std::move(u), f};
}

FidelityVector evaluate_composed_gate(std::span<const ControlAction> protocol,
                                      const TaskConfig& cfg,
                                      std::span<const StateVector> states) {
  if (cfg.qubits != 1) throw DimensionError("composed-gate calibration is single-qubit");
  if (states.empty()) throw EmptySetError("composed-gate calibration needs input states");
  const auto result = evaluate_gate_design(protocol, cfg);
  return output_fidelities(result.final_unitary, cfg.target, states);
}

FidelityVector evaluate_circuit_calibration(std::span<const ControlAction> protocol,
                                            const TaskConfig& cfg,
                                            std::span<const StateVector> states) {
  if (cfg.circuit == Circuit::Direct) {
    throw ConfigError("circuit calibration needs a BitFlip or Bell circuit");
  }
  if (states.empty()) throw EmptySetError("circuit calibration needs input states");
  const auto result = evaluate_gate_design(protocol, cfg);
  return output_fidelities(circuit_of(cfg, result.final_unitary), circuit_of(cfg, cfg.target),
                           states);
}

double min_fidelity(const FidelityVector& fv) {
  if (fv.empty()) throw EmptySetError("min_fidelity of an empty fidelity vector");
  return *std::min_element(fv.begin(), fv.end());
}

// ---------------------------------------------------------------------------
// Task

Task::Task(TaskConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  steps_.reserve(cfg_.actions.size());
  for (ActionIndex a = 0; a < cfg_.actions.size(); ++a) {
    steps_.push_back(matexp_hermitian(build_hamiltonian(cfg_, cfg_.actions.action(a)), cfg_.dt()));
  }
  ideal_circuit_ = circuit_of(cfg_, cfg_.target);
  ideal_outputs_.reserve(cfg_.training_states.size());
  for (const auto& psi : cfg_.training_states) {
    ideal_outputs_.push_back(ideal_circuit_ * psi.amplitudes());
  }
}

ComplexMatrix Task::final_unitary(std::span<const ActionIndex> protocol) const {
  check_protocol_length(protocol.size(), cfg_.horizon);
  const Eigen::Index dim = Eigen::Index{1} << cfg_.qubits;
  ComplexMatrix u = ComplexMatrix::Identity(dim, dim);
  for (ActionIndex a : protocol) {
    if (a >= steps_.size()) throw ActionShapeError("action index out of range");
    u = steps_[a] * u;
  }
  return u;
}

ComplexMatrix Task::circuit_unitary(const ComplexMatrix& u) const { return circuit_of(cfg_, u); }

FidelityVector Task::training_fidelities(const ComplexMatrix& uf) const {
  FidelityVector out;
  if (cfg_.kind == TaskKind::GateDesign) return out;
  const ComplexMatrix actual = circuit_of(cfg_, uf);
  out.reserve(ideal_outputs_.size());
  for (std::size_t j = 0; j < ideal_outputs_.size(); ++j) {
    const ComplexVector produced = actual * cfg_.training_states[j].amplitudes();
    out.push_back(std::clamp(std::norm(produced.dot(ideal_outputs_[j])), 0.0, 1.0));
  }
  return out;
}

double Task::objective(const ComplexMatrix& uf) const {
  if (cfg_.kind == TaskKind::GateDesign) return gate_fidelity(uf, cfg_.target, cfg_.qubits);
  return min_fidelity(training_fidelities(uf));
}

FidelityVector Task::state_fidelities(const ComplexMatrix& uf,
                                      std::span<const StateVector> states) const {
  return output_fidelities(circuit_of(cfg_, uf), ideal_circuit_, states);
}

// ---------------------------------------------------------------------------
// BlackBoxEnvironment

BlackBoxEnvironment::BlackBoxEnvironment(std::shared_ptr<const Task> task) : task_(std::move(task)) {
  if (!task_) throw ConfigError("environment needs a task");
}

Feedback BlackBoxEnvironment::evaluate(std::span<const ActionIndex> protocol) const {
  const ComplexMatrix uf = task_->final_unitary(protocol);
  Feedback fb;
  if (task_->config().kind == TaskKind::GateDesign) {
    fb.fidelity = gate_fidelity(uf, task_->config().target, task_->config().qubits);
  } else {
    fb.per_state = task_->training_fidelities(uf);
    fb.fidelity = min_fidelity(fb.per_state);
  }
  return fb;
}

}  // namespace qcal
