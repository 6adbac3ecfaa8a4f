#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qcal {

enum class Activation { Relu, Tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

struct Architecture {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t output_dim = 0;
  bool dueling = false;
  Activation activation = Activation::Relu;

  bool operator==(const Architecture&) const = default;
};

/// Weights of a one-hidden-layer Q-network.
///
/// The plain head maps hidden -> |A| through `out`. The dueling head reuses
/// `out` as the advantage stream Q'(S, .) and adds a scalar value stream
/// V(S) through `value`, combined as Q = V + Q' with no mean subtraction.
struct Parameters {
  Eigen::MatrixXd hidden_w;  // hidden x input
  Eigen::VectorXd hidden_b;
  Eigen::MatrixXd out_w;     // |A| x hidden
  Eigen::VectorXd out_b;
  Eigen::MatrixXd value_w;   // 1 x hidden (dueling only, else empty)
  Eigen::VectorXd value_b;

  static Parameters zeros(const Architecture& arch);

  std::size_t size() const;
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;

  Parameters& operator+=(const Parameters& other);
  Parameters& operator*=(double s);
};

/// One supervised example: the loss only touches Q(state, action).
struct Batch {
  Eigen::MatrixXd states;  // input_dim x K, one sample per column
  std::vector<std::size_t> actions;
  Eigen::VectorXd targets;

  std::size_t size() const { return actions.size(); }
};

struct GradientReport {
  Parameters gradient;
  double loss = 0.0;
};

class QNetwork {
 public:
  /// Weights and biases drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  QNetwork(const Architecture& arch, std::uint64_t seed);
  QNetwork(const Architecture& arch, Parameters params);

  static QNetwork zeros(const Architecture& arch);

  const Architecture& architecture() const { return arch_; }
  const Parameters& parameters() const { return params_; }
  Parameters& parameters() { return params_; }

  Eigen::VectorXd forward(std::span<const double> state) const;
  /// Q-values for each column of `states` (|A| x K).
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& states) const;

  /// Mean over the batch of (Q(s_k, a_k) - target_k)^2.
  double loss(const Batch& batch) const;

 private:
  friend GradientReport analytic_gradient(const QNetwork&, const Batch&);

  Architecture arch_;
  Parameters params_;
};

/// Backpropagated gradient of QNetwork::loss. Throws EmptyBatchError / ShapeError.
GradientReport analytic_gradient(const QNetwork& net, const Batch& batch);

/// One plain gradient-descent step; returns the loss before the update.
double train_step(QNetwork& net, const Batch& batch, double learning_rate);

/// Gradient descent with optional heavy-ball momentum and element-wise
/// gradient clipping. With momentum 0 and no clipping it reproduces
/// train_step exactly.
class GradientDescent {
 public:
  struct Options {
    double learning_rate = 0.005;
    double momentum = 0.0;
    std::optional<double> clip;
  };

  explicit GradientDescent(Options options) : options_(options) {}

  double step(QNetwork& net, const Batch& batch);
  const Options& options() const { return options_; }

 private:
  Options options_;
  std::optional<Parameters> velocity_;
};

/// dst <- src. Throws ShapeError when the architectures differ.
void copy_weights(const QNetwork& src, QNetwork& dst);

struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  QNetwork network;
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  /// First pulse of the best episode, used to start greedy rollouts.
  std::optional<std::size_t> first_action;
};

/// {"format_version", "architecture": {...}, "weights": [...], "seed", "episode", "first_action"}
std::string to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(std::string_view text);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace qcal
