#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace epiclt {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct NormalDist {
  static double logpdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
  }
  static double cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
  }
  /// log of the standard normal CDF difference Phi(b) - Phi(a), a < b.
  static double log_cdf_interval(double a, double b) {
    // Work with erfc for stability in the tails.
    const double lo = 0.5 * std::erfc(-a / std::sqrt(2.0));
    const double hi = 0.5 * std::erfc(-b / std::sqrt(2.0));
    const double diff = hi - lo;
    if (diff <= 0.0) return kNegInf;
    return std::log(diff);
  }
};

/// FNV-1a over bytes; used for manifest config/model hashes.
inline std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : data) {
    h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

/// Two-sample Kolmogorov-Smirnov statistic on sorted samples.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Critical value of the two-sample KS statistic at significance alpha.
inline double ks_critical(double alpha, std::size_t n, std::size_t m) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  return c * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * static_cast<double>(m)));
}

/// Rounds nonnegative reals to integers preserving the rounded total
/// (largest-remainder assignment).
std::vector<long long> largest_remainder_round(const std::vector<double>& values);

/// Runs fn(i) for i in [0, n) on up to `threads` workers.  Results must be
/// written to per-index slots; iteration order inside a worker is ascending so
/// single-threaded runs match multi-threaded ones given per-index RNG streams.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Default worker count: --threads flag, else EPICLT_THREADS, else 1.
int default_thread_count();

}  // namespace epiclt
