#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "epiclt/prior.hpp"
#include "epiclt/random.hpp"

namespace epiclt {

enum class TimeUnit { Days, Weeks };

enum class ParamRole { Epidemiological, Npi, InitialCondition };

struct ParameterDecl {
  std::string name;
  ParamRole role = ParamRole::Epidemiological;
  PriorSpec prior;
  std::optional<double> fixed;  // pinned parameters never enter the inference vector
};

/// One multiplicative factor of a rate coefficient.  Rates are declared
/// structurally (products of constants, parameters, parameter complements and
/// NPI activity factors) so the drift Jacobian and noise amplitudes follow in
/// closed form from the transition structure alone.
struct RateFactor {
  enum class Kind { Constant, Param, OneMinusParam, Activity };
  Kind kind = Kind::Constant;
  double value = 1.0;      // Constant
  std::string param;       // Param / OneMinusParam (name, resolved on finalize)
  int param_index = -1;    // index into the full parameter vector
  int cohort = -1;         // Activity

  static RateFactor constant(double v);
  static RateFactor parameter(std::string name);
  static RateFactor one_minus(std::string name);
  static RateFactor activity(int cohort);
};

struct ScalarFn {
  std::vector<RateFactor> factors;

  ScalarFn() = default;
  ScalarFn(std::initializer_list<RateFactor> fs) : factors(fs) {}
  ScalarFn& operator*=(RateFactor f) {
    factors.push_back(std::move(f));
    return *this;
  }
};

/// Progression-type rate: w = gamma(t, theta) * n_source.
struct LinearRate {
  int source = -1;
  ScalarFn coeff;
};

/// Infection rate for one susceptible cohort and one infectious class:
///   w = sum_j common(t,theta) * per_contact[j](t,theta) * S_i * I_j / Omega.
struct InfectionRate {
  int sus_cohort = -1;
  int inf_class = -1;
  ScalarFn common;
  std::vector<ScalarFn> per_contact;  // length M
};

struct Transition {
  std::string label;
  Eigen::VectorXi stoich;
  std::variant<LinearRate, InfectionRate> rate;
};

/// Time-dependent contact activity a_i(t) for non-pharmaceutical
/// interventions: a linear step down from 1 to a_i^F over a window W centred
/// at t_lock, optionally followed by a linear easing back towards
/// a_i^F + r (1 - a_i^F) at the end of the modelled period.
struct NpiSpec {
  enum class Kind { None, Step, Easing };
  Kind kind = Kind::None;
  std::string t_lock_param, w_lock_param, r_param;
  std::vector<std::string> a_f_params;  // per cohort
  double t_end = 0.0;                   // end of the modelled period (easing target time)

  int t_lock_index = -1, w_lock_index = -1, r_index = -1;
  std::vector<int> a_f_indices;
};

struct InitOverride {
  int compartment = -1;
  std::string param;     // value taken from this parameter if set ...
  int param_index = -1;
  double value = 0.0;    // ... otherwise this literal (e.g. observed deaths)
  bool from_param = false;
};

struct InitialConditionSpec {
  enum class Mode { Explicit, DominantMode };
  Mode mode = Mode::Explicit;
  Eigen::VectorXd base;           // Explicit: base fractions; empty = all-susceptible
  std::string kappa_param;        // DominantMode perturbation size
  int kappa_index = -1;
  std::vector<InitOverride> overrides;
  int conservation_class = -1;    // class absorbing per-cohort population constraint; -1 off
};

/// Named linear combination of compartments; one filter-matrix row.
struct ObservableDef {
  std::string name;
  std::vector<std::pair<int, double>> terms;  // (compartment index, weight)
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Full declaration of a Markov population process: M cohorts x L classes,
/// transition list with structural rates, parameters with truncated priors,
/// and the map from parameters to the initial state.  Immutable once
/// finalized; all operations are pure in (spec, theta, rng).
class ModelSpec {
 public:
  std::string name;
  int n_cohorts = 1;   // M
  int n_classes = 2;   // L; class 0 is susceptible
  double omega = 1.0;  // population scale
  TimeUnit time_unit = TimeUnit::Days;
  std::vector<std::string> class_names;
  std::vector<std::string> cohort_names;
  Eigen::VectorXd cohort_fractions;  // N_i / Omega
  std::vector<Transition> transitions;
  std::vector<ParameterDecl> params;
  NpiSpec npi;
  InitialConditionSpec init;
  std::vector<ObservableDef> observables;
  bool differenced_obs = false;

  int dim() const { return n_cohorts * n_classes; }
  int compartment(int cohort, int cls) const { return cohort + n_cohorts * cls; }

  ValidationReport validate() const;
  /// Resolves name references and computes the free-parameter layout.
  /// Throws std::invalid_argument if validation fails.
  void finalize();
  bool finalized() const { return finalized_; }

  // --- parameter vector layout ---------------------------------------------
  int n_free() const { return static_cast<int>(free_indices_.size()); }
  const std::vector<int>& free_indices() const { return free_indices_; }
  int param_index(const std::string& name) const;        // full vector, -1 if absent
  int free_index(const std::string& name) const;         // inference vector, -1 if absent
  std::vector<std::string> free_names() const;
  const ParameterDecl& free_param(int k) const { return params[free_indices_[k]]; }

  /// Expands the inference vector to the full parameter vector (fixed values
  /// substituted).  theta must have length n_free().
  Eigen::VectorXd expand(const Eigen::VectorXd& theta) const;

  // --- core operations ------------------------------------------------------
  /// Per-transition population rates w_xi(t, theta, n) >= 0.
  Eigen::VectorXd rates(double t, const Eigen::VectorXd& theta, const Eigen::VectorXd& n) const;

  /// Per-individual rates omega_xi(t, theta, x) on the fraction scale.
  Eigen::VectorXd rates_per_capita(double t, const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& x) const;

  /// Mean drift sum_xi r_xi omega_xi(t, theta, x).
  Eigen::VectorXd drift(double t, const Eigen::VectorXd& theta, const Eigen::VectorXd& x) const;

  /// Drift Jacobian J_ij = sum_xi r_xi,i d(omega_xi)/dx_j, analytic per rate kind.
  Eigen::MatrixXd drift_jacobian(double t, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& x) const;

  /// Fluctuation source matrix B = sum_xi r_xi r_xi^T omega_xi.
  Eigen::MatrixXd noise_matrix(double t, const Eigen::VectorXd& theta,
                               const Eigen::VectorXd& x) const;

  /// Initial fraction vector x(0) from the declared initial-condition map.
  Eigen::VectorXd initial_state(const Eigen::VectorXd& theta) const;

  double prior_logpdf(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd sample_prior(Rng& rng) const;

  /// NPI activity factors a_i(t) for all cohorts.
  Eigen::VectorXd npi_activity(double t, const Eigen::VectorXd& theta_full) const;

  /// Filter matrix assembled from the declared observables.
  Eigen::MatrixXd filter_matrix() const;

  /// All-susceptible fraction state (class 0 carries each cohort population).
  Eigen::VectorXd all_susceptible_state() const;

  // Internal helpers shared with the moments module.
  double eval_scalar(const ScalarFn& fn, double t, const Eigen::VectorXd& theta_full) const;

 private:
  friend class LinearizedModel;
  bool finalized_ = false;
  std::vector<int> free_indices_;

  void resolve_factor(RateFactor& f);
  Eigen::VectorXd dominant_mode(const Eigen::VectorXd& theta_full) const;
};

const char* to_string(TimeUnit u);
TimeUnit time_unit_from_string(const std::string& s);

}  // namespace epiclt
