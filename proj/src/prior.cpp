#include "epiclt/prior.hpp"

#include <cmath>
#include <stdexcept>

#include "epiclt/util.hpp"

namespace epiclt {

PriorSpec PriorSpec::normal(double mean, double sd, double lo, double hi) {
  PriorSpec p;
  p.family = PriorFamily::Normal;
  p.mean = mean;
  p.std = sd;
  p.lower = lo;
  p.upper = hi;
  return p;
}

PriorSpec PriorSpec::lognormal(double mean, double sd, double lo, double hi) {
  PriorSpec p;
  p.family = PriorFamily::LogNormal;
  p.mean = mean;
  p.std = sd;
  p.lower = lo;
  p.upper = hi;
  return p;
}

PriorSpec PriorSpec::point(double value) {
  PriorSpec p;
  p.family = PriorFamily::Normal;
  p.mean = value;
  p.std = 0.0;
  p.lower = value;
  p.upper = value;
  return p;
}

bool PriorSpec::valid(std::string* why) const {
  auto fail = [&](const char* msg) {
    if (why) *why = msg;
    return false;
  };
  if (!(std >= 0.0)) return fail("prior std must be >= 0");
  if (!(lower <= upper)) return fail("prior bounds out of order");
  if (family == PriorFamily::LogNormal) {
    if (!(mean > 0.0)) return fail("log-normal prior requires mean > 0");
    if (!(lower > 0.0)) return fail("log-normal prior requires lower bound > 0");
  }
  return true;
}

void PriorSpec::log_params(double& location, double& scale) const {
  // Match the untruncated natural-space mean/std.
  const double cv2 = (std / mean) * (std / mean);
  scale = std::sqrt(std::log1p(cv2));
  location = std::log(mean) - 0.5 * scale * scale;
}

double PriorSpec::logpdf(double x) const {
  if (!in_support(x)) return kNegInf;
  if (std == 0.0) return x == mean ? 0.0 : kNegInf;
  if (family == PriorFamily::Normal) {
    double lp = NormalDist::logpdf(x, mean, std);
    if (std::isfinite(lower) || std::isfinite(upper)) {
      const double a = (lower - mean) / std;
      const double b = (upper - mean) / std;
      lp -= NormalDist::log_cdf_interval(a, b);
    }
    return lp;
  }
  // Log-normal
  double m, s;
  log_params(m, s);
  const double lx = std::log(x);
  double lp = NormalDist::logpdf(lx, m, s) - lx;
  const double a = std::isfinite(lower) && lower > 0.0 ? (std::log(lower) - m) / s : -40.0;
  const double b = std::isfinite(upper) ? (std::log(upper) - m) / s : 40.0;
  lp -= NormalDist::log_cdf_interval(a, b);
  return lp;
}

double PriorSpec::sample(Rng& rng, int max_attempts) const {
  if (std == 0.0) return mean;
  if (family == PriorFamily::Normal) {
    for (int i = 0; i < max_attempts; ++i) {
      const double x = rng.normal(mean, std);
      if (in_support(x)) return x;
    }
  } else {
    double m, s;
    log_params(m, s);
    for (int i = 0; i < max_attempts; ++i) {
      const double x = std::exp(rng.normal(m, s));
      if (in_support(x)) return x;
    }
  }
  throw std::runtime_error("PriorSpec::sample: rejection failed after max attempts");
}

double PriorSpec::truncated_mean() const {
  if (std == 0.0) return mean;
  if (family == PriorFamily::Normal) {
    if (!std::isfinite(lower) && !std::isfinite(upper)) return mean;
    const double a = (lower - mean) / std;
    const double b = (upper - mean) / std;
    const double phi_a = std::exp(-0.5 * a * a) / std::sqrt(2.0 * M_PI);
    const double phi_b = std::isfinite(b) ? std::exp(-0.5 * b * b) / std::sqrt(2.0 * M_PI) : 0.0;
    const double z = std::exp(NormalDist::log_cdf_interval(a, b));
    return mean + std * (phi_a - phi_b) / z;
  }
  // Numeric quadrature over the truncated log-normal support.
  double m, s;
  log_params(m, s);
  const double lo = std::isfinite(lower) && lower > 0.0 ? std::log(lower) : m - 10.0 * s;
  const double hi = std::isfinite(upper) ? std::log(upper) : m + 10.0 * s;
  const int n = 2000;
  const double h = (hi - lo) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = lo + i * h;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    const double dens = std::exp(-0.5 * ((y - m) / s) * ((y - m) / s));
    num += w * std::exp(y) * dens;
    den += w * dens;
  }
  return num / den;
}

}  // namespace epiclt
