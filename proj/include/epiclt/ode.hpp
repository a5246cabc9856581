#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace epiclt {

struct OdeOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double initial_step = 0.0;  // 0 = choose automatically
  double min_step_fraction = 1e-12;  // of span; smaller steps abort the solve
  long max_steps = 10'000'000;
};

struct OdeFailure : std::runtime_error {
  double t;
  explicit OdeFailure(const std::string& msg, double time)
      : std::runtime_error(msg), t(time) {}
};

/// Dormand-Prince 5(4) embedded Runge-Kutta with the standard quartic dense
/// interpolant.  Steps land exactly on requested stop times; the interpolant
/// serves values on the accepted-step grid in between.
class Dopri5 {
 public:
  using Rhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;

  /// One accepted step's interpolation data.
  struct Segment {
    double t0, h;
    Eigen::VectorXd r1, r2, r3, r4, r5;
    Eigen::VectorXd eval(double t) const;
  };

  Dopri5(Rhs rhs, OdeOptions opts = {}) : rhs_(std::move(rhs)), opts_(opts) {}

  /// Integrates from (t0, y0) to t_end, invoking on_step(t, y) after every
  /// accepted step (including the initial point).  Keeps dense segments when
  /// keep_dense is true.
  void integrate(double t0, const Eigen::VectorXd& y0, double t_end,
                 const std::function<void(double, const Eigen::VectorXd&)>& on_step = nullptr,
                 bool keep_dense = false);

  const Eigen::VectorXd& state() const { return y_; }
  double time() const { return t_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Evaluates the dense interpolant at time t (requires keep_dense).
  Eigen::VectorXd dense_eval(double t) const;

 private:
  Rhs rhs_;
  OdeOptions opts_;
  double t_ = 0.0;
  double h_ = 0.0;
  Eigen::VectorXd y_, f_;  // FSAL: f_ = rhs(t_, y_)
  std::vector<Segment> segments_;

  double initial_step_size(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                           double direction) const;
};

/// Convenience: integrate and return the states at the requested times
/// (strictly increasing, first >= t0).
std::vector<Eigen::VectorXd> integrate_at(const Dopri5::Rhs& rhs, double t0,
                                          const Eigen::VectorXd& y0,
                                          const std::vector<double>& times,
                                          const OdeOptions& opts = {});

}  // namespace epiclt
