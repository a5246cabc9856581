#include "epiclt/likelihood.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace epiclt {

namespace {

/// Attempts the jitter ladder; returns true on success and fills llt.
bool factorize_with_jitter(const Eigen::MatrixXd& g, const LikelihoodOptions& opts,
                           Eigen::LLT<Eigen::MatrixXd>& llt, Eigen::MatrixXd& g_used,
                           double& jitter_out) {
  const int n = static_cast<int>(g.rows());
  const double ridge = opts.ridge * g.trace() / n;
  for (double lambda : opts.jitter_ladder) {
    g_used = g;
    g_used.diagonal() += lambda * g.diagonal();
    g_used.diagonal().array() += ridge;
    llt.compute(g_used);
    if (llt.info() == Eigen::Success) {
      jitter_out = lambda;
      return true;
    }
  }
  return false;
}

}  // namespace

ObservationModel build_observation_model(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                         const ObservationSet& obs,
                                         const LikelihoodOptions& opts) {
  obs.validate();
  const int d = spec.dim();
  const int m = obs.m_obs();
  const int nt = obs.n_times();

  ObservationModel om;
  MomentOptions mo;
  mo.ode = opts.ode;
  om.moments = compute_moments(spec, theta, obs.times, mo);
  om.g_full = assemble_cross_covariance(om.moments);

  // Observation operator A on the stacked fluctuation vector: block filter,
  // composed with first-differencing when observations are increments.
  om.a_op = Eigen::MatrixXd::Zero(m * nt, d * nt);
  for (int t = 0; t < nt; ++t) {
    om.a_op.block(t * m, t * d, m, d) = obs.filter;
    if (obs.differenced && t > 0) om.a_op.block(t * m, (t - 1) * d, m, d) = -obs.filter;
  }

  om.g_proj = om.a_op * om.g_full * om.a_op.transpose();
  om.g_proj = 0.5 * (om.g_proj + om.g_proj.transpose()).eval();

  om.ybar.resize(m * nt);
  const Eigen::VectorXd x0 = om.moments.mean.front();
  for (int t = 0; t < nt; ++t) {
    Eigen::VectorXd v = obs.filter * om.moments.mean_at_obs[t];
    if (obs.differenced)
      v -= obs.filter * (t == 0 ? x0 : om.moments.mean_at_obs[t - 1]);
    om.ybar.segment(t * m, m) = spec.omega * v;
  }
  return om;
}

LikelihoodEvaluation log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                    const ObservationSet& obs, const LikelihoodOptions& opts) {
  LikelihoodEvaluation ev;
  ObservationModel om;
  try {
    om = build_observation_model(spec, theta, obs, opts);
  } catch (const std::exception& e) {
    ev.diagnostic = std::string("moment computation failed: ") + e.what();
    return ev;
  }
  if (!om.ybar.allFinite() || !om.g_proj.allFinite()) {
    ev.diagnostic = "non-finite moments";
    return ev;
  }

  ev.ybar = om.ybar;
  ev.delta = (obs.y - om.ybar) / std::sqrt(spec.omega);

  Eigen::LLT<Eigen::MatrixXd> llt;
  if (!factorize_with_jitter(om.g_proj, opts, llt, ev.g, ev.jitter)) {
    ev.diagnostic = "projected covariance not positive definite after max jitter";
    return ev;
  }

  const Eigen::VectorXd alpha = llt.solve(ev.delta);
  double logdet = 0.0;
  for (int i = 0; i < ev.g.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
  logdet *= 2.0;
  const int n = static_cast<int>(ev.g.rows());
  ev.loglik = -0.5 * (ev.delta.dot(alpha) + logdet + n * std::log(2.0 * M_PI / spec.omega));
  if (!std::isfinite(ev.loglik)) {
    ev.diagnostic = "non-finite log-likelihood";
    ev.loglik = kNegInf;
  }
  return ev;
}

double log_posterior(const ModelSpec& spec, const Eigen::VectorXd& theta,
                     const ObservationSet& obs, const LikelihoodOptions& opts) {
  const double lp = spec.prior_logpdf(theta);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(spec, theta, obs, opts).loglik;
}

ConditionalLatent conditional_latent(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                     const ObservationSet& obs, Rng& rng, int n_samples,
                                     const LikelihoodOptions& opts) {
  const ObservationModel om = build_observation_model(spec, theta, obs, opts);
  const int d = spec.dim();
  const int nt = obs.n_times();
  const double sqrt_omega = std::sqrt(spec.omega);

  ConditionalLatent out;
  out.times = obs.times;
  out.dim = d;

  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::MatrixXd k_used;
  double jitter = 0.0;
  if (!factorize_with_jitter(om.g_proj, opts, llt, k_used, jitter))
    throw std::runtime_error("conditional_latent: singular projected covariance after max jitter");

  const Eigen::VectorXd delta = (obs.y - om.ybar) / sqrt_omega;
  const Eigen::MatrixXd cross = om.g_full * om.a_op.transpose();  // cov(u, observed)
  const Eigen::VectorXd mean_u = cross * llt.solve(delta);

  Eigen::VectorXd xbar_stack(d * nt);
  for (int t = 0; t < nt; ++t) xbar_stack.segment(t * d, d) = om.moments.mean_at_obs[t];
  out.mean = xbar_stack + mean_u / sqrt_omega;
  out.cov = om.g_full - cross * llt.solve(cross.transpose());
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();

  if (n_samples > 0) {
    // Factor the unconditional covariance (PSD, often rank-deficient for
    // closed populations), then condition each draw with Matheron's rule:
    //   u_cond = u + cov(u, obs) K^{-1} (delta - A u).
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(om.g_full);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("conditional_latent: eigen factorization failed");
    Eigen::VectorXd sqrt_ev = es.eigenvalues();
    const double floor = 0.0;
    for (int i = 0; i < sqrt_ev.size(); ++i)
      sqrt_ev[i] = sqrt_ev[i] > floor ? std::sqrt(sqrt_ev[i]) : 0.0;
    const Eigen::MatrixXd root = es.eigenvectors() * sqrt_ev.asDiagonal();

    out.samples.reserve(n_samples);
    Eigen::VectorXd z(root.cols());
    for (int s = 0; s < n_samples; ++s) {
      for (int i = 0; i < z.size(); ++i) z[i] = rng.normal();
      const Eigen::VectorXd u = root * z;
      const Eigen::VectorXd u_cond = u + cross * llt.solve(delta - om.a_op * u);
      out.samples.push_back(xbar_stack + u_cond / sqrt_omega);
    }
  }
  return out;
}

}  // namespace epiclt
