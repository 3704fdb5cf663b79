#include "qecho/record.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "qecho/common.hpp"

namespace qecho {

namespace {
constexpr std::uint64_t kChunkSize = 256;
}

FidelityRecord::FidelityRecord(int d_max)
    : d_max(d_max),
      count(static_cast<std::size_t>(d_max) + 1, 0),
      sum(static_cast<std::size_t>(d_max) + 1, 0.0),
      sum_sq(static_cast<std::size_t>(d_max) + 1, 0.0),
      trunc_sum(static_cast<std::size_t>(d_max) + 1, 0.0) {
  if (d_max < 0) throw InvalidArgument("d_max must be nonnegative");
}

void FidelityRecord::add(const TrajectoryRow& row) {
  if (row.fidelity.size() != count.size()) {
    throw InvalidArgument("trajectory row length does not match the record depth");
  }
  for (std::size_t d = 0; d < count.size(); ++d) {
    const double f = row.fidelity[d];
    ++count[d];
    sum[d] += f;
    sum_sq[d] += f * f;
    if (d < row.truncation.size()) trunc_sum[d] += row.truncation[d];
  }
}

void FidelityRecord::merge(const FidelityRecord& other) {
  if (other.d_max != d_max) throw InvalidArgument("cannot merge records with different d_max");
  if (!config_digest.empty() && !other.config_digest.empty() && config_digest != other.config_digest) {
    throw InvalidArgument("cannot merge records from different configurations");
  }
  if (config_digest.empty()) config_digest = other.config_digest;
  for (std::size_t d = 0; d < count.size(); ++d) {
    count[d] += other.count[d];
    sum[d] += other.sum[d];
    sum_sq[d] += other.sum_sq[d];
    trunc_sum[d] += other.trunc_sum[d];
  }
}

FidelityRecord run_chunked(int d_max, std::uint64_t first, std::uint64_t n_traj, int workers,
                           const std::function<TrajectoryRow(std::uint64_t)>& trajectory) {
  FidelityRecord total(d_max);
  if (n_traj == 0) return total;
  const std::uint64_t n_chunks = (n_traj + kChunkSize - 1) / kChunkSize;
  const auto n_workers = static_cast<std::uint64_t>(std::max(1, workers));

  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex mutex;
  std::exception_ptr error;
  std::map<std::uint64_t, FidelityRecord> pending;
  std::uint64_t merged = 0;

  auto work = [&] {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks || failed.load()) return;
      FidelityRecord chunk(d_max);
      try {
        const std::uint64_t lo = first + c * kChunkSize;
        const std::uint64_t hi = first + std::min(n_traj, (c + 1) * kChunkSize);
        for (std::uint64_t j = lo; j < hi; ++j) chunk.add(trajectory(j));
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
      std::lock_guard lock(mutex);
      pending.emplace(c, std::move(chunk));
      while (!pending.empty() && pending.begin()->first == merged) {
        total.merge(pending.begin()->second);
        pending.erase(pending.begin());
        ++merged;
      }
    }
  };

  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::uint64_t w = 0; w < std::min(n_workers, n_chunks); ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return total;
}

}  // namespace qecho
