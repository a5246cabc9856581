#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "epiclt/ode.hpp"

namespace epiclt {

/// Generic linear-noise system: mean drift, its state Jacobian, and the
/// fluctuation source matrix, all evaluated along the mean path.
struct LnaSystem {
  int dim = 0;
  std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)> drift;
  std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> jacobian;
  std::function<Eigen::MatrixXd(double, const Eigen::VectorXd&)> noise;
};

/// Mean path, scaled-fluctuation covariances at the observation times and
/// propagators between them, integrated as one augmented system so all three
/// see the same mean.
struct MomentTrajectory {
  std::vector<double> grid;             // strictly increasing; includes obs times
  std::vector<Eigen::VectorXd> mean;    // mean path on grid
  std::vector<double> obs_times;
  std::vector<Eigen::VectorXd> mean_at_obs;
  std::vector<Eigen::MatrixXd> cov_at_obs;           // Sigma(t_mu), symmetrized
  std::vector<std::vector<Eigen::MatrixXd>> prop;    // prop[nu][mu] = U(t_mu, t_nu), mu <= nu
  std::vector<Eigen::MatrixXd> prop_from_start;      // U(t0, t_mu)
  double worst_negative_clip = 0.0;     // largest mean clip applied during integration
  bool clip_warning = false;            // clip exceeded 1e-6

  int dim() const { return mean.empty() ? 0 : static_cast<int>(mean.front().size()); }
  const Eigen::MatrixXd& propagator(int mu, int nu) const { return prop[nu][mu]; }
  /// Linear interpolation of the mean on the stored grid.
  Eigen::VectorXd mean_at(double t) const;
};

struct MomentOptions {
  OdeOptions ode;
  bool want_cov = true;
  bool want_prop = true;
  double clip_warn_threshold = 1e-6;
};

/// Integrates mean, covariance and inter-observation propagators from
/// (t0, x0) with Sigma(t0) = 0.  Negative mean components are clipped to zero
/// before the system callbacks see them.
MomentTrajectory compute_moments(const LnaSystem& sys, const Eigen::VectorXd& x0, double t0,
                                 const std::vector<double>& obs_times,
                                 const MomentOptions& opts = {});

/// Stacked two-time covariance over the observation times: diagonal blocks
/// Sigma(t_mu), lower blocks U(t_mu, t_nu) Sigma(t_mu); output symmetrized.
Eigen::MatrixXd assemble_cross_covariance(const MomentTrajectory& m);

}  // namespace epiclt
