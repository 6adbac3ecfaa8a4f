#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qcal/agent.hpp"
#include "qcal/envs.hpp"
#include "qcal/stategen.hpp"

namespace qcal::cli {

/// Everything a training run needs, loaded from a flat `key = value` file.
///
/// Relative input paths are resolved against the config file's directory;
/// `output_dir` is resolved against the working directory.
struct RunConfig {
  std::string task = "hadamard";  // hadamard | cnot | tx | ty | bitflip | bell | custom
  AgentVariant variant{true, false};
  HyperParams hp;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "run";

  std::optional<std::size_t> horizon_steps;
  std::optional<double> total_time;

  std::optional<std::filesystem::path> training_states_file;
  std::optional<std::filesystem::path> test_states_file;
  std::size_t training_state_count = 0;  // 0: task default (100 single-qubit, 50 Bell)
  std::size_t test_state_count = 0;      // 0: no test evaluation unless a file is given
  double testing_pulse_duration = kTestingPulseDuration;
  ControlSampling testing_control_sampling = ControlSampling::Continuous;

  // custom task
  std::string custom_kind = "gate_design";  // gate_design | composed
  std::string custom_hamiltonian = "single";  // single | two
  std::string custom_target = "H";            // gate names multiplied as written
  std::optional<double> custom_fixed_u0;
  std::vector<double> custom_control_values{-4.0, 4.0};
};

/// Throws ConfigError on unknown or duplicate keys, bad values, or missing files.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = std::filesystem::current_path());
RunConfig load_run_config(const std::filesystem::path& path);

/// Canonical `key = value` rendering of every setting.
std::string render_run_config(const RunConfig& cfg);

inline constexpr std::size_t kBellPoolSize = 10000;

struct TaskBundle {
  TaskConfig task;
  std::optional<StateSet> test_states;
};

/// Builds the task (generating default state sets from the run seed) and,
/// when configured, the held-out test states.
TaskBundle build_task(const RunConfig& cfg);

/// A named preset with default state sets derived from `seed`.
TaskConfig preset_task(std::string_view name, std::uint64_t seed,
                       std::optional<std::size_t> horizon = std::nullopt,
                       std::optional<double> total_time = std::nullopt);

/// Default held-out states for a task: 1-qubit testing states, or products
/// of them for 2-qubit tasks.
StateSet default_test_states(int qubits, std::size_t count, std::uint64_t seed,
                             double dt = kTestingPulseDuration,
                             ControlSampling sampling = ControlSampling::Continuous);

/// Product of gate names as written, e.g. "S H T H S_dagger".
ComplexMatrix gate_product(std::string_view names);

}  // namespace qcal::cli
