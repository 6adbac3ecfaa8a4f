#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "stats.hpp"

namespace qcal::cli {

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> episodes;
  std::uint64_t progress_every = 0;  // 0: silent
};

struct TrainOutcome {
  TrainingResult result;
  std::filesystem::path output_dir;
  bool interrupted = false;
};

/// Writes training_log.csv, summary.json, best_protocol.json, checkpoint.json
/// and, when test states are configured, test_eval.json.
TrainOutcome cmd_train(const TrainOptions& opts);

struct EvaluateOptions {
  std::optional<std::filesystem::path> protocol;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::string> task;
  std::optional<std::filesystem::path> config;
  std::optional<std::size_t> horizon;
  std::optional<double> total_time;
  std::optional<std::filesystem::path> states;
  std::size_t count = 1000;
  std::uint64_t seed = 0;
  double state_normalization = 40.0;
  std::optional<std::filesystem::path> out;
};

/// Infidelity statistics of the protocol's gate on every test state.
BoxStats cmd_evaluate(const EvaluateOptions& opts);

struct OracleOptions {
  std::optional<std::string> task;
  std::optional<std::filesystem::path> config;
  std::optional<std::size_t> horizon;
  std::optional<double> total_time;
  std::optional<std::filesystem::path> out;
};

std::string cmd_oracle(const OracleOptions& opts);

struct GenStatesOptions {
  std::string kind = "training";  // training | testing | two-qubit
  std::size_t count = 100;
  std::uint64_t seed = 0;
  double theta = kTrainingTheta;
  double dt = kTestingPulseDuration;
  ControlSampling sampling = ControlSampling::Continuous;
  std::optional<std::filesystem::path> out;
};

std::string cmd_gen_states(const GenStatesOptions& opts);

struct ReportOptions {
  std::filesystem::path log;
  std::size_t window = 2000;
  WindowMode mode = WindowMode::Disjoint;
  std::optional<std::filesystem::path> out;
};

std::string cmd_report(const ReportOptions& opts);

/// Protocol file written by `train` and read by `evaluate`.
struct ProtocolFile {
  std::string task;
  int qubits = 1;
  std::size_t horizon = 0;
  double total_time = 0.0;
  std::vector<ActionIndex> indices;
  std::vector<ControlAction> actions;
  double fidelity = 0.0;
};

std::string protocol_to_json(const ProtocolFile& p);
ProtocolFile protocol_from_json(std::string_view text);

/// Command-line entry point; returns the process exit code
/// (0 success, 1 configuration error, 2 runtime error).
int run(int argc, const char* const* argv);

}  // namespace qcal::cli
