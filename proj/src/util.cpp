#include "epiclt/util.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>

namespace epiclt {

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const std::size_t n = a.size(), m = b.size();
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < n && j < m) {
    const double x = std::min(a[i], b[j]);
    while (i < n && a[i] <= x) ++i;
    while (j < m && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

std::vector<long long> largest_remainder_round(const std::vector<double>& values) {
  const std::size_t n = values.size();
  std::vector<long long> out(n);
  double total = 0.0;
  for (double v : values) total += v;
  const long long target = std::llround(total);
  long long assigned = 0;
  std::vector<std::pair<double, std::size_t>> remainders(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::max(0.0, values[i]);
    out[i] = static_cast<long long>(std::floor(v));
    assigned += out[i];
    remainders[i] = {v - std::floor(v), i};
  }
  long long leftover = target - assigned;
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (std::size_t k = 0; leftover > 0 && k < n; ++k) {
    ++out[remainders[k].second];
    --leftover;
  }
  // Rounding up floors can overshoot only if inputs were negative; guard anyway.
  for (std::size_t k = n; leftover < 0 && k-- > 0;) {
    if (out[remainders[k].second] > 0) {
      --out[remainders[k].second];
      ++leftover;
    }
  }
  return out;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(n)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&fn, n, w, workers] {
      for (std::size_t i = static_cast<std::size_t>(w); i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

int default_thread_count() {
  if (const char* env = std::getenv("EPICLT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 1;
}

}  // namespace epiclt
