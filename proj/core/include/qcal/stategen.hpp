#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcal/qmath.hpp"

namespace qcal {

enum class StateSetKind { Training, Testing };

/// How the pulse amplitude u is drawn when generating testing states.
enum class ControlSampling {
  Continuous,  // uniform on [-4, 4)
  TwoPoint,    // uniform on {-4, 4}
};

struct StateSet {
  StateSetKind kind = StateSetKind::Training;
  std::uint64_t seed = 0;
  std::optional<double> theta;  // phase angle of the H.Phase.H training circuit
  std::optional<double> dt;     // pulse duration of the testing-state evolution
  std::vector<StateVector> states;

  std::size_t size() const { return states.size(); }
};

inline constexpr double kTrainingTheta = 0.16738 * std::numbers::pi;
inline constexpr double kTestingPulseDuration = 0.05;
/// Two training states count as repeats when their overlap reaches this.
inline constexpr double kDistinctOverlapLimit = 1.0 - 1e-9;

/// Iterates |psi_{k+1}> = H Phase(theta) H |psi_k> from |0> and keeps the
/// first `count` outputs. Deterministic. Throws DegenerateStateSet when two
/// outputs coincide (e.g. theta = 0).
StateSet gen_training_states(std::size_t count, double theta = kTrainingTheta);

/// Iterates |psi_{k+1}> = exp(-i (sigma_z + u_k sigma_x) dt) |psi_k> from |0>
/// with u_k drawn from the seeded stream; one evolution step per state.
StateSet gen_testing_states(std::size_t count, std::uint64_t seed,
                            double dt = kTestingPulseDuration,
                            ControlSampling sampling = ControlSampling::Continuous);

/// Product states |a> (x) |b> with a and b drawn independently and uniformly
/// from a single-qubit pool. Throws EmptySetError on an empty pool.
StateSet gen_two_qubit_states(const StateSet& pool, std::size_t count, std::uint64_t seed,
                              StateSetKind kind = StateSetKind::Training);

/// max_{i != j} |<psi_i|psi_j>|^2, or 0 for fewer than two states.
double max_pairwise_overlap(std::span<const StateVector> states);

/// {"kind", "seed", "theta", "dt", "states": [[[re, im], ...], ...]}
std::string to_json(const StateSet& set);
StateSet state_set_from_json(std::string_view text);

void save_state_set(const StateSet& set, const std::filesystem::path& path);
StateSet load_state_set(const std::filesystem::path& path);

std::string_view to_string(StateSetKind kind);

}  // namespace qcal
