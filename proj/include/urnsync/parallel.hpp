#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace urnsync {

[[nodiscard]] inline unsigned default_threads() noexcept {
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Items handled sequentially by one leaf of the reduction tree. Part of the
/// reproducibility contract: changing it changes floating-point results.
inline constexpr std::size_t reduction_leaf_size = 64;

/// Deterministic parallel map-reduce over items [0, n).
///
/// Items are cut into fixed leaves of `leaf_size`; `leaf(begin, end)` builds
/// one partial per leaf, and partials are combined by `combine(left, right)`
/// in a fixed balanced binary tree. The result depends only on `n` and
/// `leaf_size`, never on `threads` or scheduling.
template <class Partial, class LeafFn, class CombineFn>
[[nodiscard]] Partial tree_reduce(std::size_t n, unsigned threads, LeafFn&& leaf, CombineFn&& combine,
                                  std::size_t leaf_size = reduction_leaf_size) {
  const std::size_t n_leaves = std::max<std::size_t>(1, (n + leaf_size - 1) / leaf_size);
  std::vector<std::optional<Partial>> parts(n_leaves);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next++; k < n_leaves; k = next++) {
      try {
        const std::size_t begin = k * leaf_size;
        parts[k].emplace(leaf(begin, std::min(n, begin + leaf_size)));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n_leaves;
      }
    }
  };

  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_leaves));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<Partial> level;
  level.reserve(n_leaves);
  for (auto& p : parts) level.push_back(std::move(*p));
  while (level.size() > 1) {
    std::vector<Partial> up;
    up.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < level.size(); i += 2) up.push_back(combine(level[i], level[i + 1]));
    if (level.size() % 2 == 1) up.push_back(std::move(level.back()));
    level = std::move(up);
  }
  return std::move(level.front());
}

} // namespace urnsync
