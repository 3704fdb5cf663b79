#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace qecho {

// Per-depth fidelity samples of one trajectory, d = 0..d_max.
struct TrajectoryRow {
  std::vector<double> fidelity;
  std::vector<double> truncation;  // discarded weight per depth (MPS only)
};

// Per-depth tallies of echo fidelity samples. Merge is entrywise addition.
struct FidelityRecord {
  int d_max = 0;
  std::vector<std::uint64_t> count;
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::vector<double> trunc_sum;
  std::uint64_t master_seed = 0;
  std::string config_digest;

  FidelityRecord() = default;
  explicit FidelityRecord(int d_max);

  void add(const TrajectoryRow& row);
  void merge(const FidelityRecord& other);
  std::uint64_t trajectories() const { return count.empty() ? 0 : count.front(); }
};

// Runs trajectories [first, first + n_traj) in fixed-size chunks. Each chunk
// is reduced in trajectory order and chunks are merged in chunk order, so
// the result does not depend on the worker count.
FidelityRecord run_chunked(int d_max, std::uint64_t first, std::uint64_t n_traj, int workers,
                           const std::function<TrajectoryRow(std::uint64_t)>& trajectory);

}  // namespace qecho
