#include "epiclt/ode.hpp"

#include <algorithm>
#include <cmath>

namespace epiclt {

namespace {
// Dormand-Prince coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// Error coefficients: b5 - b4.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// Dense-output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace

Eigen::VectorXd Dopri5::Segment::eval(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)));
}

double Dopri5::initial_step_size(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                                 double direction) const {
  // Hairer-Norsett-Wanner starting step heuristic.
  const double sk = opts_.atol + opts_.rtol * y0.cwiseAbs().maxCoeff();
  const double d0 = y0.norm() / std::sqrt(static_cast<double>(y0.size())) / sk;
  const double d1n = f0.norm() / std::sqrt(static_cast<double>(y0.size())) / sk;
  double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
  Eigen::VectorXd y1 = y0 + direction * h0 * f0;
  Eigen::VectorXd f1(y0.size());
  rhs_(t0 + direction * h0, y1, f1);
  const double d2 = (f1 - f0).norm() / std::sqrt(static_cast<double>(y0.size())) / sk / h0;
  const double dmax = std::max(d1n, d2);
  double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min(100.0 * h0, h1);
}

void Dopri5::integrate(double t0, const Eigen::VectorXd& y0, double t_end,
                       const std::function<void(double, const Eigen::VectorXd&)>& on_step,
                       bool keep_dense) {
  const int n = static_cast<int>(y0.size());
  t_ = t0;
  y_ = y0;
  f_.resize(n);
  rhs_(t_, y_, f_);
  if (on_step) on_step(t_, y_);
  if (t_end == t0) return;
  const double direction = t_end > t0 ? 1.0 : -1.0;
  const double span = std::fabs(t_end - t0);

  double h = opts_.initial_step > 0.0 ? opts_.initial_step
                                      : initial_step_size(t0, y0, f_, direction);
  h = std::min(h, span);

  Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), yt(n), ynew(n), err(n);
  long steps = 0;
  while (direction * (t_end - t_) > 0.0) {
    if (++steps > opts_.max_steps) throw OdeFailure("ODE solver exceeded max step count", t_);
    bool last = false;
    if (direction * (t_ + direction * h - t_end) >= 0.0) {
      h = std::fabs(t_end - t_);
      last = true;
    }
    if (h < opts_.min_step_fraction * span)
      throw OdeFailure("ODE step size underflow (stiff blow-up?)", t_);
    const double hd = direction * h;

    yt = y_ + hd * (a21 * f_);
    rhs_(t_ + c2 * hd, yt, k2);
    yt = y_ + hd * (a31 * f_ + a32 * k2);
    rhs_(t_ + c3 * hd, yt, k3);
    yt = y_ + hd * (a41 * f_ + a42 * k2 + a43 * k3);
    rhs_(t_ + c4 * hd, yt, k4);
    yt = y_ + hd * (a51 * f_ + a52 * k2 + a53 * k3 + a54 * k4);
    rhs_(t_ + c5 * hd, yt, k5);
    yt = y_ + hd * (a61 * f_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs_(t_ + hd, yt, k6);
    ynew = y_ + hd * (a71 * f_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs_(t_ + hd, ynew, k7);

    err = hd * (e1 * f_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      const double sk = opts_.atol + opts_.rtol * std::max(std::fabs(y_[i]), std::fabs(ynew[i]));
      const double r = err[i] / sk;
      norm += r * r;
    }
    norm = std::sqrt(norm / n);

    if (norm <= 1.0) {
      if (keep_dense) {
        Segment seg;
        seg.t0 = t_;
        seg.h = hd;
        seg.r1 = y_;
        seg.r2 = ynew - y_;
        seg.r3 = hd * f_ - seg.r2;
        seg.r4 = seg.r2 - hd * k7 - seg.r3;
        seg.r5 = hd * (d1 * f_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
        segments_.push_back(std::move(seg));
      }
      t_ = last ? t_end : t_ + hd;
      y_.swap(ynew);
      f_.swap(k7);  // FSAL
      if (on_step) on_step(t_, y_);
      const double fac = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      h = std::min(h * fac, span);
    } else {
      h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
    }
  }
}

Eigen::VectorXd Dopri5::dense_eval(double t) const {
  if (segments_.empty()) throw std::runtime_error("dense_eval: no stored segments");
  // Binary search for the segment containing t (assumes forward integration).
  std::size_t lo = 0, hi = segments_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (segments_[mid].t0 + segments_[mid].h < t)
      lo = mid + 1;
    else
      hi = mid;
  }
  return segments_[lo].eval(t);
}

std::vector<Eigen::VectorXd> integrate_at(const Dopri5::Rhs& rhs, double t0,
                                          const Eigen::VectorXd& y0,
                                          const std::vector<double>& times,
                                          const OdeOptions& opts) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(times.size());
  Dopri5 solver(rhs, opts);
  Eigen::VectorXd y = y0;
  double t = t0;
  for (double target : times) {
    if (target < t) throw std::invalid_argument("integrate_at: times must be non-decreasing");
    if (target > t) {
      solver.integrate(t, y, target);
      y = solver.state();
      t = target;
    }
    out.push_back(y);
  }
  return out;
}

}  // namespace epiclt
