#pragma once

#include "epiclt/moments.hpp"
#include "epiclt/observation.hpp"

namespace epiclt {

struct LikelihoodOptions {
  OdeOptions ode;
  /// Jitter ladder for near-singular projected covariances: lambda * diag(G)
  /// plus a fixed trace-scaled ridge, escalated on Cholesky failure.
  std::vector<double> jitter_ladder = {0.0, 1e-10, 1e-8, 1e-6};
  double ridge = 1e-12;
};

struct LikelihoodEvaluation {
  double loglik = kNegInf;
  Eigen::VectorXd ybar;   // model-predicted observations, same convention as the data
  Eigen::VectorXd delta;  // (y - ybar) / sqrt(Omega)
  Eigen::MatrixXd g;      // projected covariance actually factorised (jitter included)
  double jitter = 0.0;
  std::string diagnostic;  // non-empty when the evaluation failed
  bool ok() const { return diagnostic.empty(); }
};

/// Gaussian-process observation structure at fixed theta: stacked mean,
/// projected covariance and the pieces needed for conditioning.
struct ObservationModel {
  MomentTrajectory moments;
  Eigen::MatrixXd g_full;     // cross-time covariance of the full state (u scale)
  Eigen::MatrixXd g_proj;     // A g_full A^T, A = differencing * block filter
  Eigen::VectorXd ybar;       // predicted observations
  Eigen::MatrixXd a_op;       // observation operator on the stacked u vector
};

/// CLT log-likelihood of the observations.  Infeasible or non-finite
/// evaluations return -inf with a diagnostic rather than throwing, so
/// optimizers and samplers can reject smoothly.
LikelihoodEvaluation log_likelihood(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                    const ObservationSet& obs, const LikelihoodOptions& opts = {});

double log_posterior(const ModelSpec& spec, const Eigen::VectorXd& theta,
                     const ObservationSet& obs, const LikelihoodOptions& opts = {});

/// Builds the observation-model structure; throws on integration failure.
ObservationModel build_observation_model(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                         const ObservationSet& obs,
                                         const LikelihoodOptions& opts = {});

struct ConditionalLatent {
  std::vector<double> times;
  Eigen::VectorXd mean;               // stacked fractions, conditioned on the data
  Eigen::MatrixXd cov;                // conditional covariance on the u scale
  std::vector<Eigen::VectorXd> samples;  // stacked fractions, one per draw
  int dim = 0;                        // compartments per time block
};

/// Joint Gaussian of the full latent state at the observation times,
/// conditioned on the observed combinations; sampled with Matheron's rule so
/// each draw reproduces the data exactly.
ConditionalLatent conditional_latent(const ModelSpec& spec, const Eigen::VectorXd& theta,
                                     const ObservationSet& obs, Rng& rng, int n_samples,
                                     const LikelihoodOptions& opts = {});

}  // namespace epiclt
