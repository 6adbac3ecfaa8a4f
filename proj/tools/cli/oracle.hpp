#pragma once

#include <cstdint>
#include <vector>

#include "qcal/envs.hpp"

namespace qcal::cli {

inline constexpr std::uint64_t kOracleSearchLimit = std::uint64_t{1} << 24;

struct OracleResult {
  std::vector<ActionIndex> protocol;
  double fidelity = 0.0;
  std::uint64_t enumerated = 0;
};

/// Exhaustive search over all |A|^N protocols in lexicographic order; ties
/// keep the first protocol found. Throws SearchSpaceError above the limit.
OracleResult exhaustive_search(const Task& task, std::uint64_t limit = kOracleSearchLimit);

}  // namespace qcal::cli
