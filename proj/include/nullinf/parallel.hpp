// Node-parallel evaluation with a fixed-tree pairwise reduction, so results
// do not depend on the thread count.
#pragma once

#include <cstddef>
#include <span>
#include <thread>
#include <type_traits>
#include <vector>

namespace nullinf {

void set_threads(int n);
int threads();

namespace detail {
bool& in_parallel_region();
}

// Calls f(i) for i in [0, n) and returns the results in index order.
// Nested calls run serially on the calling thread.
template <class F>
auto parallel_map(std::size_t n, F&& f) {
  using T = std::decay_t<decltype(f(std::size_t{0}))>;
  std::vector<T> out(n);
  const int nt = threads();
  if (nt <= 1 || n < 64 || detail::in_parallel_region()) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(nt), n);
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_parallel_region() = true;
      for (std::size_t i = w; i < n; i += workers) out[i] = f(i);
    });
  }
  pool.clear();
  return out;
}

template <class T>
T pairwise_sum(std::span<const T> xs) {
  if (xs.empty()) return T{};
  if (xs.size() <= 8) {
    T acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = acc + xs[i];
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& xs) {
  return pairwise_sum(std::span<const T>(xs.data(), xs.size()));
}

}  // namespace nullinf
