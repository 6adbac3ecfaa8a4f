#include "oracle.hpp"

#include "qcal/errors.hpp"

namespace qcal::cli {

OracleResult exhaustive_search(const Task& task, std::uint64_t limit) {
  const std::size_t a = task.actions().size();
  const std::size_t n = task.horizon();
  std::uint64_t total = 1;
  for (std::size_t i = 0; i < n; ++i) {
    if (total > limit / a) {
      throw SearchSpaceError("search space |A|^N exceeds " + std::to_string(limit));
    }
    total *= a;
  }

  OracleResult best;
  best.fidelity = -1.0;
  std::vector<ActionIndex> protocol(n, 0);
  // prefix[i] = U(A_i) ... U(A_1)
  const std::size_t dim = std::size_t{1} << task.config().qubits;
  std::vector<ComplexMatrix> prefix(n + 1, ComplexMatrix::Identity(dim, dim));

  auto recurse = [&](auto& self, std::size_t depth) -> void {
    if (depth == n) {
      ++best.enumerated;
      const double f = task.objective(prefix[n]);
      if (f > best.fidelity) {
        best.fidelity = f;
        best.protocol = protocol;
      }
      return;
    }
    for (ActionIndex act = 0; act < a; ++act) {
      protocol[depth] = act;
      prefix[depth + 1].noalias() = task.step_unitary(act) * prefix[depth];
      self(self, depth + 1);
    }
  };
  recurse(recurse, 0);
  return best;
}

}  // namespace qcal::cli
