#include "qcal/net.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "qcal/errors.hpp"
#include "qcal/rng.hpp"

namespace qcal {

using nlohmann::json;

std::string_view to_string(Activation a) { return a == Activation::Relu ? "relu" : "tanh"; }

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

// Visits the parameter tensors in their canonical order.
template <class P, class F>
void visit_tensors(P& p, F&& f) {
  f(p.hidden_w);
  f(p.hidden_b);
  f(p.out_w);
  f(p.out_b);
  f(p.value_w);
  f(p.value_b);
}

template <class P, class Q, class F>
void visit_pairs(P& a, Q& b, F&& f) {
  f(a.hidden_w, b.hidden_w);
  f(a.hidden_b, b.hidden_b);
  f(a.out_w, b.out_w);
  f(a.out_b, b.out_b);
  f(a.value_w, b.value_w);
  f(a.value_b, b.value_b);
}

void check_architecture(const Architecture& arch) {
  if (arch.input_dim == 0 || arch.hidden_dim == 0 || arch.output_dim == 0) {
    throw ShapeError("network dimensions must be positive");
  }
}

}  // namespace

Parameters Parameters::zeros(const Architecture& arch) {
  check_architecture(arch);
  const auto in = static_cast<Eigen::Index>(arch.input_dim);
  const auto hid = static_cast<Eigen::Index>(arch.hidden_dim);
  const auto out = static_cast<Eigen::Index>(arch.output_dim);
  Parameters p;
  p.hidden_w = Eigen::MatrixXd::Zero(hid, in);
  p.hidden_b = Eigen::VectorXd::Zero(hid);
  p.out_w = Eigen::MatrixXd::Zero(out, hid);
  p.out_b = Eigen::VectorXd::Zero(out);
  if (arch.dueling) {
    p.value_w = Eigen::MatrixXd::Zero(1, hid);
    p.value_b = Eigen::VectorXd::Zero(1);
  }
  return p;
}

std::size_t Parameters::size() const {
  std::size_t n = 0;
  visit_tensors(*this, [&](const auto& t) { n += static_cast<std::size_t>(t.size()); });
  return n;
}

std::vector<double> Parameters::flatten() const {
  std::vector<double> flat;
  flat.reserve(size());
  visit_tensors(*this, [&](const auto& t) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) flat.push_back(t(i, j));
    }
  });
  return flat;
}

void Parameters::assign(std::span<const double> flat) {
  if (flat.size() != size()) throw ShapeError("flat parameter vector has the wrong length");
  std::size_t k = 0;
  visit_tensors(*this, [&](auto& t) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = flat[k++];
    }
  });
}

bool Parameters::all_finite() const {
  bool ok = true;
  visit_tensors(*this, [&](const auto& t) { ok = ok && t.allFinite(); });
  return ok;
}

Parameters& Parameters::operator+=(const Parameters& other) {
  visit_pairs(*this, other, [](auto& a, const auto& b) { a += b; });
  return *this;
}

Parameters& Parameters::operator*=(double s) {
  visit_tensors(*this, [&](auto& t) { t *= s; });
  return *this;
}

// ---------------------------------------------------------------------------
// QNetwork

QNetwork::QNetwork(const Architecture& arch, std::uint64_t seed)
    : arch_(arch), params_(Parameters::zeros(arch)) {
  Rng rng(seed);
  const double hidden_bound = 1.0 / std::sqrt(static_cast<double>(arch.input_dim));
  const double head_bound = 1.0 / std::sqrt(static_cast<double>(arch.hidden_dim));
  auto fill = [&](auto& t, double bound) {
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) = rng.uniform(-bound, bound);
    }
  };
  fill(params_.hidden_w, hidden_bound);
  fill(params_.hidden_b, hidden_bound);
  fill(params_.out_w, head_bound);
  fill(params_.out_b, head_bound);
  fill(params_.value_w, head_bound);
  fill(params_.value_b, head_bound);
}

QNetwork::QNetwork(const Architecture& arch, Parameters params)
    : arch_(arch), params_(std::move(params)) {
  const Parameters shape = Parameters::zeros(arch);
  bool ok = true;
  visit_pairs(params_, shape, [&](const auto& a, const auto& b) {
    ok = ok && a.rows() == b.rows() && a.cols() == b.cols();
  });
  if (!ok) throw ShapeError("parameter shapes do not match the architecture");
  if (!params_.all_finite()) throw ShapeError("network weights must be finite");
}

QNetwork QNetwork::zeros(const Architecture& arch) { return QNetwork(arch, Parameters::zeros(arch)); }

namespace {

struct Activations {
  Eigen::MatrixXd pre;     // hidden x K
  Eigen::MatrixXd hidden;  // act(pre)
  Eigen::MatrixXd q;       // |A| x K
};

Activations run_forward(const Architecture& arch, const Parameters& p, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.rows()) != arch.input_dim) {
    throw ShapeError("input has " + std::to_string(x.rows()) + " features, network expects " +
                     std::to_string(arch.input_dim));
  }
  Activations a;
  a.pre = p.hidden_w * x;
  a.pre.colwise() += p.hidden_b;
  a.hidden = arch.activation == Activation::Relu ? a.pre.cwiseMax(0.0).eval()
                                                 : a.pre.array().tanh().matrix().eval();
  a.q = p.out_w * a.hidden;
  a.q.colwise() += p.out_b;
  if (arch.dueling) {
    Eigen::RowVectorXd v = p.value_w * a.hidden;
    v.array() += p.value_b[0];
    a.q.rowwise() += v;
  }
  return a;
}

void check_batch(const Architecture& arch, const Batch& batch) {
  if (batch.size() == 0) throw EmptyBatchError("training batch is empty");
  const auto k = static_cast<Eigen::Index>(batch.size());
  if (batch.states.cols() != k || batch.targets.size() != k) {
    throw ShapeError("batch states, actions and targets disagree in length");
  }
  for (std::size_t a : batch.actions) {
    if (a >= arch.output_dim) throw ShapeError("batch action index out of range");
  }
}

}  // namespace

Eigen::VectorXd QNetwork::forward(std::span<const double> state) const {
  const Eigen::Map<const Eigen::VectorXd> x(state.data(), static_cast<Eigen::Index>(state.size()));
  return run_forward(arch_, params_, x).q.col(0);
}

Eigen::MatrixXd QNetwork::forward_batch(const Eigen::MatrixXd& states) const {
  return run_forward(arch_, params_, states).q;
}

double QNetwork::loss(const Batch& batch) const {
  check_batch(arch_, batch);
  const Eigen::MatrixXd q = forward_batch(batch.states);
  double total = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const double diff = q(static_cast<Eigen::Index>(batch.actions[k]), static_cast<Eigen::Index>(k)) -
                        batch.targets[static_cast<Eigen::Index>(k)];
    total += diff * diff;
  }
  return total / static_cast<double>(batch.size());
}

GradientReport analytic_gradient(const QNetwork& net, const Batch& batch) {
  const Architecture& arch = net.arch_;
  const Parameters& p = net.params_;
  check_batch(arch, batch);
  const Activations a = run_forward(arch, p, batch.states);

  const auto k = static_cast<Eigen::Index>(batch.size());
  const double scale = 2.0 / static_cast<double>(k);
  Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(a.q.rows(), k);
  double total = 0.0;
  for (Eigen::Index s = 0; s < k; ++s) {
    const auto act = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(s)]);
    const double diff = a.q(act, s) - batch.targets[s];
    total += diff * diff;
    dq(act, s) = scale * diff;
  }

  GradientReport report{Parameters::zeros(arch), total / static_cast<double>(k)};
  Parameters& g = report.gradient;
  g.out_w = dq * a.hidden.transpose();
  g.out_b = dq.rowwise().sum();
  Eigen::MatrixXd dh = p.out_w.transpose() * dq;
  if (arch.dueling) {
    const Eigen::RowVectorXd dv = dq.colwise().sum();
    g.value_w = dv * a.hidden.transpose();
    g.value_b[0] = dv.sum();
    dh += p.value_w.transpose() * dv;
  }
  Eigen::MatrixXd dpre;
  if (arch.activation == Activation::Relu) {
    dpre = (a.pre.array() > 0.0).select(dh, 0.0);
  } else {
    dpre = dh.array() * (1.0 - a.hidden.array().square());
  }
  g.hidden_w = dpre * batch.states.transpose();
  g.hidden_b = dpre.rowwise().sum();
  return report;
}

double train_step(QNetwork& net, const Batch& batch, double learning_rate) {
  GradientReport report = analytic_gradient(net, batch);
  report.gradient *= -learning_rate;
  net.parameters() += report.gradient;
  return report.loss;
}

double GradientDescent::step(QNetwork& net, const Batch& batch) {
  GradientReport report = analytic_gradient(net, batch);
  Parameters& g = report.gradient;
  if (options_.clip) {
    const double c = *options_.clip;
    visit_tensors(g, [c](auto& t) { t = t.cwiseMax(-c).cwiseMin(c); });
  }
  if (options_.momentum != 0.0) {
    if (!velocity_) velocity_ = Parameters::zeros(net.architecture());
    *velocity_ *= options_.momentum;
    *velocity_ += g;
    g = *velocity_;
  }
  g *= -options_.learning_rate;
  net.parameters() += g;
  return report.loss;
}

void copy_weights(const QNetwork& src, QNetwork& dst) {
  if (!(src.architecture() == dst.architecture())) {
    throw ShapeError("copy_weights: architectures differ");
  }
  dst.parameters() = src.parameters();
}

// ---------------------------------------------------------------------------
// Checkpoints

namespace {

template <class T>
json tensor_to_json(const T& t) {
  if constexpr (T::ColsAtCompileTime == 1) {
    return json(std::vector<double>(t.data(), t.data() + t.size()));
  } else {
    json rows = json::array();
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(t.cols()));
      for (Eigen::Index j = 0; j < t.cols(); ++j) row[static_cast<std::size_t>(j)] = t(i, j);
      rows.push_back(std::move(row));
    }
    return rows;
  }
}

void matrix_from_json(const json& j, Eigen::MatrixXd& m) {
  if (static_cast<Eigen::Index>(j.size()) != m.rows()) throw ParseError("weight matrix row count");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != m.cols()) throw ParseError("weight matrix column count");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
}

void vector_from_json(const json& j, Eigen::VectorXd& v) {
  if (static_cast<Eigen::Index>(j.size()) != v.size()) throw ParseError("bias vector length");
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
}

}  // namespace

std::string to_json(const Checkpoint& ckpt) {
  const Architecture& arch = ckpt.network.architecture();
  const Parameters& p = ckpt.network.parameters();
  json weights = json::array();
  weights.push_back(tensor_to_json(p.hidden_w));
  weights.push_back(tensor_to_json(p.hidden_b));
  weights.push_back(tensor_to_json(p.out_w));
  weights.push_back(tensor_to_json(p.out_b));
  if (arch.dueling) {
    weights.push_back(tensor_to_json(p.value_w));
    weights.push_back(tensor_to_json(p.value_b));
  }
  json doc;
  doc["format_version"] = Checkpoint::kFormatVersion;
  doc["architecture"] = {{"input_dim", arch.input_dim},
                         {"hidden_dim", arch.hidden_dim},
                         {"output_dim", arch.output_dim},
                         {"dueling", arch.dueling},
                         {"activation", std::string(to_string(arch.activation))}};
  doc["weights"] = std::move(weights);
  doc["seed"] = ckpt.seed;
  doc["episode"] = ckpt.episode;
  doc["first_action"] = ckpt.first_action ? json(*ckpt.first_action) : json(nullptr);
  return doc.dump() + "\n";
}

Checkpoint checkpoint_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format_version").get<int>() != Checkpoint::kFormatVersion) {
      throw ParseError("unsupported checkpoint format_version");
    }
    const json& a = doc.at("architecture");
    Architecture arch;
    arch.input_dim = a.at("input_dim").get<std::size_t>();
    arch.hidden_dim = a.at("hidden_dim").get<std::size_t>();
    arch.output_dim = a.at("output_dim").get<std::size_t>();
    arch.dueling = a.at("dueling").get<bool>();
    arch.activation = parse_activation(a.at("activation").get<std::string>());

    Parameters p = Parameters::zeros(arch);
    const json& w = doc.at("weights");
    if (w.size() != (arch.dueling ? 6u : 4u)) throw ParseError("unexpected number of weight tensors");
    matrix_from_json(w.at(0), p.hidden_w);
    vector_from_json(w.at(1), p.hidden_b);
    matrix_from_json(w.at(2), p.out_w);
    vector_from_json(w.at(3), p.out_b);
    if (arch.dueling) {
      matrix_from_json(w.at(4), p.value_w);
      vector_from_json(w.at(5), p.value_b);
    }
    Checkpoint ckpt{QNetwork(arch, std::move(p)), doc.at("seed").get<std::uint64_t>(),
                    doc.at("episode").get<std::uint64_t>(), std::nullopt};
    if (doc.contains("first_action") && !doc.at("first_action").is_null()) {
      ckpt.first_action = doc.at("first_action").get<std::size_t>();
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace qcal
