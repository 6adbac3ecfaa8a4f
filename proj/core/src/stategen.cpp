#include "qcal/stategen.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qcal/errors.hpp"
#include "qcal/rng.hpp"

namespace qcal {

using nlohmann::json;

std::string_view to_string(StateSetKind kind) {
  return kind == StateSetKind::Training ? "training" : "testing";
}

double max_pairwise_overlap(std::span<const StateVector> states) {
  double worst = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = i + 1; j < states.size(); ++j) {
      worst = std::max(worst, state_fidelity(states[i], states[j]));
    }
  }
  return worst;
}

StateSet gen_training_states(std::size_t count, double theta) {
  const ComplexMatrix step = gates::hadamard() * gates::phase(theta) * gates::hadamard();
  StateSet set;
  set.kind = StateSetKind::Training;
  set.theta = theta;
  set.states.reserve(count);
  StateVector psi = StateVector::basis(2, 0);
  for (std::size_t k = 0; k < count; ++k) {
    psi = psi.evolved(step);
    set.states.push_back(psi);
  }
  if (max_pairwise_overlap(set.states) >= kDistinctOverlapLimit) {
    throw DegenerateStateSet("training generator repeats a state; choose another phase angle");
  }
  return set;
}

StateSet gen_testing_states(std::size_t count, std::uint64_t seed, double dt,
                            ControlSampling sampling) {
  Rng rng(seed);
  StateSet set;
  set.kind = StateSetKind::Testing;
  set.seed = seed;
  set.dt = dt;
  set.states.reserve(count);
  StateVector psi = StateVector::basis(2, 0);
  for (std::size_t k = 0; k < count; ++k) {
    const double u = sampling == ControlSampling::Continuous
                         ? rng.uniform(-4.0, 4.0)
                         : (rng.index(2) == 0 ? -4.0 : 4.0);
    const ComplexMatrix h = gates::pauli_z() + u * gates::pauli_x();
    psi = psi.evolved(matexp_hermitian(h, dt));
    set.states.push_back(psi);
  }
  return set;
}

StateSet gen_two_qubit_states(const StateSet& pool, std::size_t count, std::uint64_t seed,
                              StateSetKind kind) {
  if (pool.states.empty()) throw EmptySetError("two-qubit generator needs a nonempty pool");
  for (const auto& s : pool.states) {
    if (s.dim() != 2) throw DimensionError("two-qubit generator needs a single-qubit pool");
  }
  Rng rng(seed);
  StateSet set;
  set.kind = kind;
  set.seed = seed;
  set.dt = pool.dt;
  set.theta = pool.theta;
  set.states.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const auto& a = pool.states[rng.index(pool.states.size())];
    const auto& b = pool.states[rng.index(pool.states.size())];
    ComplexVector prod(4);
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) prod[2 * i + j] = a.amplitudes()[i] * b.amplitudes()[j];
    }
    set.states.push_back(StateVector::normalized(std::move(prod)));
  }
  return set;
}

std::string to_json(const StateSet& set) {
  json states = json::array();
  for (const auto& psi : set.states) {
    json amps = json::array();
    for (std::size_t i = 0; i < psi.dim(); ++i) amps.push_back({psi[i].real(), psi[i].imag()});
    states.push_back(std::move(amps));
  }
  json doc;
  doc["kind"] = std::string(to_string(set.kind));
  doc["seed"] = set.seed;
  doc["theta"] = set.theta ? json(*set.theta) : json(nullptr);
  doc["dt"] = set.dt ? json(*set.dt) : json(nullptr);
  doc["states"] = std::move(states);
  return doc.dump() + "\n";
}

StateSet state_set_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("state set is not valid JSON: ") + e.what());
  }
  try {
    StateSet set;
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "training") {
      set.kind = StateSetKind::Training;
    } else if (kind == "testing") {
      set.kind = StateSetKind::Testing;
    } else {
      throw ParseError("unknown state set kind '" + kind + "'");
    }
    set.seed = doc.at("seed").get<std::uint64_t>();
    if (!doc.at("theta").is_null()) set.theta = doc.at("theta").get<double>();
    if (!doc.at("dt").is_null()) set.dt = doc.at("dt").get<double>();
    for (const auto& amps : doc.at("states")) {
      ComplexVector v(static_cast<Eigen::Index>(amps.size()));
      for (std::size_t i = 0; i < amps.size(); ++i) {
        const auto& pair = amps.at(i);
        if (pair.size() != 2) throw ParseError("amplitude must be a [re, im] pair");
        v[static_cast<Eigen::Index>(i)] = Complex(pair.at(0).get<double>(), pair.at(1).get<double>());
      }
      set.states.emplace_back(std::move(v));
    }
    return set;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed state set: ") + e.what());
  }
}

void save_state_set(const StateSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(set);
}

StateSet load_state_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return state_set_from_json(buf.str());
}

}  // namespace qcal
