#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

namespace apg {

struct SuiteOptions {
  std::string out_dir = "out";
  std::size_t seeds = 5;
  std::uint64_t master_seed = 2024;
  unsigned threads = 0;  ///< 0 picks the hardware concurrency
  bool quick = false;    ///< coarse grids, for smoke tests
};

/// Rennala, synchronized and greedy NIGT on the benchmark MDP with ten agents
/// under three timing regimes ("equal", "heterogeneous", "comm"). Step sizes
/// (and M for Rennala) are tuned per regime and method on median
/// time-to-target. Writes <out>/figure1/<regime>/<method>/seed_k.csv plus
/// per-method and top-level summary.json files, and returns the top-level summary.
nlohmann::json suite_figure1(const SuiteOptions& options);

/// Malenia versus greedy NIGT with two agents whose environments differ by a
/// state relabeling; writes <out>/heterogeneous/<method>/seed_k.csv.
nlohmann::json suite_heterogeneous(const SuiteOptions& options);

/// Simulated round times against the one-round bounds and the predictors as
/// the agent count grows (h_i = sqrt(i)); writes <out>/scaling/scaling.csv.
nlohmann::json suite_scaling(const SuiteOptions& options);

}  // namespace apg
