#pragma once

#include <limits>
#include <string>

#include "epiclt/random.hpp"

namespace epiclt {

enum class PriorFamily { Normal, LogNormal };

/// Truncated normal or log-normal prior on one parameter.  `mean` and `std`
/// are the moments of the *untruncated* distribution in natural units; for
/// the log-normal family they are converted internally to log-space location
/// and scale.  logpdf carries the analytic truncation normalisation so the
/// density integrates to 1 over [lower, upper].
struct PriorSpec {
  PriorFamily family = PriorFamily::Normal;
  double mean = 0.0;
  double std = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  static PriorSpec normal(double mean, double sd,
                          double lo = -std::numeric_limits<double>::infinity(),
                          double hi = std::numeric_limits<double>::infinity());
  static PriorSpec lognormal(double mean, double sd, double lo = 0.0,
                             double hi = std::numeric_limits<double>::infinity());
  /// Degenerate prior used for pinned parameters in summaries.
  static PriorSpec point(double value);

  bool valid(std::string* why = nullptr) const;
  bool in_support(double x) const { return x >= lower && x <= upper; }

  double logpdf(double x) const;
  /// Rejection sampling from the untruncated family; throws after
  /// max_attempts misses (pathologically narrow bounds).
  double sample(Rng& rng, int max_attempts = 100000) const;

  /// Mean and variance of the *truncated* distribution (used to centre
  /// optimizer transforms; exact for Normal, numeric for LogNormal).
  double truncated_mean() const;

  /// Log-space parameters for the LogNormal family.
  void log_params(double& location, double& scale) const;
};

}  // namespace epiclt
