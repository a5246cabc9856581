#pragma once

#include "epiclt/lna.hpp"
#include "epiclt/model.hpp"

namespace epiclt {

/// Drift Jacobian and fluctuation source matrix at one point of the mean path.
struct LocalLinearization {
  Eigen::MatrixXd jacobian;  // J(t, theta, xbar)
  Eigen::MatrixXd noise;     // B = sum_xi r r^T omega_xi, symmetric PSD
};

LocalLinearization linearize(const ModelSpec& spec, const Eigen::VectorXd& theta, double t,
                             const Eigen::VectorXd& xbar);

/// Bundles the model's drift/Jacobian/noise callbacks for the LNA core.
LnaSystem lna_system(const ModelSpec& spec, const Eigen::VectorXd& theta);

/// Mean path x(t) on the requested grid, starting from the model's declared
/// initial state at t = 0.
std::vector<Eigen::VectorXd> integrate_mean(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                            const std::vector<double>& grid,
                                            const OdeOptions& opts = {});

/// Covariance Sigma(t) of the scaled fluctuations at the requested times,
/// integrated jointly with the mean from (t0, x0) with Sigma(t0) = 0.
std::vector<Eigen::MatrixXd> integrate_covariance(const ModelSpec& spec,
                                                  const Eigen::VectorXd& theta,
                                                  const Eigen::VectorXd& x0, double t0,
                                                  const std::vector<double>& times,
                                                  const OdeOptions& opts = {});

/// Propagators U(s, t) for each t in t_list (t >= s), integrated jointly with
/// the mean from (s, x_at_s).
std::vector<Eigen::MatrixXd> integrate_propagator(const ModelSpec& spec,
                                                  const Eigen::VectorXd& theta,
                                                  const Eigen::VectorXd& x_at_s, double s,
                                                  const std::vector<double>& t_list,
                                                  const OdeOptions& opts = {});

/// Full moment computation for a model over its observation times.
MomentTrajectory compute_moments(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                 const std::vector<double>& obs_times,
                                 const MomentOptions& opts = {});

}  // namespace epiclt
