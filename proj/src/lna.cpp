#include "epiclt/lna.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epiclt {

Eigen::VectorXd MomentTrajectory::mean_at(double t) const {
  if (grid.empty()) throw std::runtime_error("mean_at: empty trajectory");
  if (t <= grid.front()) return mean.front();
  if (t >= grid.back()) return mean.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - w) * mean[lo] + w * mean[hi];
}

MomentTrajectory compute_moments(const LnaSystem& sys, const Eigen::VectorXd& x0, double t0,
                                 const std::vector<double>& obs_times,
                                 const MomentOptions& opts) {
  const int d = sys.dim;
  if (x0.size() != d) throw std::invalid_argument("compute_moments: x0 dimension mismatch");
  for (std::size_t i = 0; i < obs_times.size(); ++i) {
    if (obs_times[i] < t0) throw std::invalid_argument("compute_moments: observation before t0");
    if (i > 0 && obs_times[i] <= obs_times[i - 1])
      throw std::invalid_argument("compute_moments: observation times must increase");
  }

  const bool cov = opts.want_cov;
  const bool prp = opts.want_prop;
  const int n_aug = d + (cov ? d * d : 0) + (prp ? d * d : 0);
  const int cov_off = d;
  const int prop_off = d + (cov ? d * d : 0);

  MomentTrajectory out;
  out.obs_times = obs_times;

  double worst_clip = 0.0;
  Eigen::VectorXd xc(d);

  auto rhs = [&](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    for (int i = 0; i < d; ++i) {
      if (y[i] < 0.0) worst_clip = std::max(worst_clip, -y[i]);
      xc[i] = std::max(0.0, y[i]);
    }
    dy.setZero(n_aug);
    dy.head(d) = sys.drift ? sys.drift(t, xc) : Eigen::VectorXd::Zero(d);
    if (cov || prp) {
      const Eigen::MatrixXd jac = sys.jacobian(t, xc);
      if (cov) {
        Eigen::Map<const Eigen::MatrixXd> sig(y.data() + cov_off, d, d);
        Eigen::Map<Eigen::MatrixXd> dsig(dy.data() + cov_off, d, d);
        dsig = jac * sig;
        dsig += dsig.transpose().eval();
        dsig += sys.noise(t, xc);
      }
      if (prp) {
        Eigen::Map<const Eigen::MatrixXd> u(y.data() + prop_off, d, d);
        Eigen::Map<Eigen::MatrixXd> du(dy.data() + prop_off, d, d);
        du = jac * u;
      }
    }
  };

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n_aug);
  y.head(d) = x0;
  if (prp) Eigen::Map<Eigen::MatrixXd>(y.data() + prop_off, d, d).setIdentity();

  auto on_step = [&out, d](double t, const Eigen::VectorXd& state) {
    if (!out.grid.empty() && t <= out.grid.back()) return;
    out.grid.push_back(t);
    out.mean.push_back(state.head(d));
  };

  out.grid.push_back(t0);
  out.mean.push_back(x0);

  const std::size_t m = obs_times.size();
  std::vector<Eigen::MatrixXd> step_prop;  // step_prop[k] = U(t_{k-1}, t_k)
  Dopri5 solver(rhs, opts.ode);
  double t = t0;
  for (std::size_t k = 0; k < m; ++k) {
    const double target = obs_times[k];
    if (target > t) {
      solver.integrate(t, y, target, on_step);
      y = solver.state();
      t = target;
    }
    out.mean_at_obs.push_back(y.head(d));
    if (cov) {
      Eigen::Map<Eigen::MatrixXd> sig(y.data() + cov_off, d, d);
      Eigen::MatrixXd s = 0.5 * (sig + sig.transpose());
      sig = s;  // keep the integrated state symmetric too
      out.cov_at_obs.push_back(std::move(s));
    }
    if (prp) {
      Eigen::Map<Eigen::MatrixXd> u(y.data() + prop_off, d, d);
      step_prop.push_back(u);
      u.setIdentity();
    }
  }

  if (prp) {
    // prop[nu][mu] = U(t_mu, t_nu) by composing the per-interval propagators.
    out.prop.resize(m);
    out.prop_from_start.resize(m);
    for (std::size_t nu = 0; nu < m; ++nu) {
      out.prop[nu].resize(nu + 1);
      out.prop[nu][nu] = Eigen::MatrixXd::Identity(d, d);
      for (std::size_t mu = nu; mu-- > 0;)
        out.prop[nu][mu] = step_prop[nu] * out.prop[nu - 1][mu];
      out.prop_from_start[nu] =
          nu == 0 ? step_prop[0] : Eigen::MatrixXd(step_prop[nu] * out.prop_from_start[nu - 1]);
    }
  }

  out.worst_negative_clip = worst_clip;
  out.clip_warning = worst_clip > opts.clip_warn_threshold;
  return out;
}

Eigen::MatrixXd assemble_cross_covariance(const MomentTrajectory& m) {
  const std::size_t nt = m.obs_times.size();
  if (nt == 0) throw std::invalid_argument("assemble_cross_covariance: no observation times");
  if (m.cov_at_obs.size() != nt) throw std::runtime_error("missing covariance blocks");
  const int d = static_cast<int>(m.cov_at_obs.front().rows());
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(nt * d, nt * d);
  for (std::size_t mu = 0; mu < nt; ++mu) {
    g.block(mu * d, mu * d, d, d) = m.cov_at_obs[mu];
    for (std::size_t nu = mu + 1; nu < nt; ++nu) {
      if (m.prop.size() <= nu) throw std::runtime_error("missing propagator block");
      const Eigen::MatrixXd blk = m.propagator(mu, nu) * m.cov_at_obs[mu];
      g.block(nu * d, mu * d, d, d) = blk;
      g.block(mu * d, nu * d, d, d) = blk.transpose();
    }
  }
  return 0.5 * (g + g.transpose());
}

}  // namespace epiclt
