#pragma once

// Deterministic parallel reductions over Monte Carlo paths.
//
// Paths are grouped in fixed-size blocks; each block is reduced
// sequentially and block results are combined in block order. The worker
// count only changes who computes a block, never the arithmetic.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace klasian {

inline constexpr std::uint64_t kPathBlockSize = 1024;

/// Running sums for a sample mean and its standard error.
struct Moments {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::uint64_t count = 0;

  void add(double x) noexcept {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  void merge(const Moments& other) noexcept {
    sum += other.sum;
    sum_sq += other.sum_sq;
    count += other.count;
  }
  double mean() const noexcept { return count ? sum / static_cast<double>(count) : 0.0; }
  double variance() const noexcept {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double m = sum / n;
    return std::max(0.0, (sum_sq - n * m * m) / (n - 1.0));
  }
  double std_error() const noexcept {
    return count ? std::sqrt(variance() / static_cast<double>(count)) : 0.0;
  }
};

/// Worker count: explicit request, else KLASIAN_WORKERS, else hardware.
inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("KLASIAN_WORKERS")) {
    const long value = std::strtol(env, nullptr, 10);
    if (value > 0) return static_cast<unsigned>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Run `block_fn(block_index)` for every block, returning results in block
/// order. `block_fn` must only touch state it owns.
template <typename Result, typename BlockFn>
std::vector<Result> run_blocks(std::uint64_t n_blocks, unsigned workers, BlockFn&& block_fn) {
  std::vector<Result> results(n_blocks);
  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_workers(workers), n_blocks));
  if (n_threads <= 1) {
    for (std::uint64_t b = 0; b < n_blocks; ++b) results[b] = block_fn(b);
    return results;
  }
  std::atomic<std::uint64_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::uint64_t b = next++; b < n_blocks; b = next++) results[b] = block_fn(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          next = n_blocks;
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

/// Mean/standard error of `path_fn(path_index)` over `n_paths` paths.
template <typename PathFn>
Moments accumulate_paths(std::uint64_t n_paths, unsigned workers, PathFn&& path_fn) {
  const std::uint64_t n_blocks = (n_paths + kPathBlockSize - 1) / kPathBlockSize;
  const auto blocks = run_blocks<Moments>(n_blocks, workers, [&](std::uint64_t b) {
    Moments m;
    const std::uint64_t end = std::min(n_paths, (b + 1) * kPathBlockSize);
    for (std::uint64_t p = b * kPathBlockSize; p < end; ++p) m.add(path_fn(p));
    return m;
  });
  Moments total;
  for (const auto& m : blocks) total.merge(m);
  return total;
}

}  // namespace klasian
