#include "epiclt/moments.hpp"

namespace epiclt {

LocalLinearization linearize(const ModelSpec& spec, const Eigen::VectorXd& theta, double t,
                             const Eigen::VectorXd& xbar) {
  const Eigen::VectorXd x = xbar.cwiseMax(0.0);
  return {spec.drift_jacobian(t, theta, x), spec.noise_matrix(t, theta, x)};
}

LnaSystem lna_system(const ModelSpec& spec, const Eigen::VectorXd& theta) {
  LnaSystem sys;
  sys.dim = spec.dim();
  sys.drift = [&spec, theta](double t, const Eigen::VectorXd& x) {
    return spec.drift(t, theta, x);
  };
  sys.jacobian = [&spec, theta](double t, const Eigen::VectorXd& x) {
    return spec.drift_jacobian(t, theta, x);
  };
  sys.noise = [&spec, theta](double t, const Eigen::VectorXd& x) {
    return spec.noise_matrix(t, theta, x);
  };
  return sys;
}

std::vector<Eigen::VectorXd> integrate_mean(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                            const std::vector<double>& grid,
                                            const OdeOptions& opts) {
  const Eigen::VectorXd x0 = spec.initial_state(theta);
  auto rhs = [&spec, &theta](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    dy = spec.drift(t, theta, y.cwiseMax(0.0));
  };
  return integrate_at(rhs, 0.0, x0, grid, opts);
}

std::vector<Eigen::MatrixXd> integrate_covariance(const ModelSpec& spec,
                                                  const Eigen::VectorXd& theta,
                                                  const Eigen::VectorXd& x0, double t0,
                                                  const std::vector<double>& times,
                                                  const OdeOptions& opts) {
  MomentOptions mo;
  mo.ode = opts;
  mo.want_prop = false;
  const auto traj = compute_moments(lna_system(spec, theta), x0, t0, times, mo);
  return traj.cov_at_obs;
}

std::vector<Eigen::MatrixXd> integrate_propagator(const ModelSpec& spec,
                                                  const Eigen::VectorXd& theta,
                                                  const Eigen::VectorXd& x_at_s, double s,
                                                  const std::vector<double>& t_list,
                                                  const OdeOptions& opts) {
  MomentOptions mo;
  mo.ode = opts;
  mo.want_cov = false;
  const auto traj = compute_moments(lna_system(spec, theta), x_at_s, s, t_list, mo);
  return traj.prop_from_start;
}

MomentTrajectory compute_moments(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                 const std::vector<double>& obs_times,
                                 const MomentOptions& opts) {
  const Eigen::VectorXd x0 = spec.initial_state(theta);
  return compute_moments(lna_system(spec, theta), x0, 0.0, obs_times, opts);
}

}  // namespace epiclt
