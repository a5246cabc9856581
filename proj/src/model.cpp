#include "epiclt/model.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "epiclt/util.hpp"

namespace epiclt {

RateFactor RateFactor::constant(double v) {
  RateFactor f;
  f.kind = Kind::Constant;
  f.value = v;
  return f;
}

RateFactor RateFactor::parameter(std::string name) {
  RateFactor f;
  f.kind = Kind::Param;
  f.param = std::move(name);
  return f;
}

RateFactor RateFactor::one_minus(std::string name) {
  RateFactor f;
  f.kind = Kind::OneMinusParam;
  f.param = std::move(name);
  return f;
}

RateFactor RateFactor::activity(int cohort) {
  RateFactor f;
  f.kind = Kind::Activity;
  f.cohort = cohort;
  return f;
}

const char* to_string(TimeUnit u) { return u == TimeUnit::Days ? "day" : "week"; }

TimeUnit time_unit_from_string(const std::string& s) {
  if (s == "day" || s == "days") return TimeUnit::Days;
  if (s == "week" || s == "weeks") return TimeUnit::Weeks;
  throw std::invalid_argument("unknown time unit: " + s);
}

int ModelSpec::param_index(const std::string& pname) const {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i].name == pname) return static_cast<int>(i);
  return -1;
}

int ModelSpec::free_index(const std::string& pname) const {
  for (int k = 0; k < n_free(); ++k)
    if (params[free_indices_[k]].name == pname) return k;
  return -1;
}

std::vector<std::string> ModelSpec::free_names() const {
  std::vector<std::string> out;
  out.reserve(free_indices_.size());
  for (int idx : free_indices_) out.push_back(params[idx].name);
  return out;
}

ValidationReport ModelSpec::validate() const {
  ValidationReport rep;
  auto add = [&rep](const std::string& msg) { rep.violations.push_back(msg); };

  if (n_cohorts < 1) add("cohort count must be >= 1");
  if (n_classes < 2) add("class count must be >= 2");
  if (!(omega > 0.0)) add("population scale omega must be positive");
  const int d = dim();

  if (!class_names.empty() && static_cast<int>(class_names.size()) != n_classes)
    add("class name list length does not match class count");
  if (cohort_fractions.size() != 0 && cohort_fractions.size() != n_cohorts)
    add("cohort fraction list length does not match cohort count");
  if (cohort_fractions.size() == n_cohorts)
    for (int i = 0; i < n_cohorts; ++i)
      if (!(cohort_fractions[i] > 0.0)) add("cohort fractions must be positive");

  std::set<std::string> names;
  for (const auto& p : params) {
    if (p.name.empty()) add("parameter with empty name");
    if (!names.insert(p.name).second) add("duplicate parameter name: " + p.name);
    std::string why;
    if (!p.fixed && !p.prior.valid(&why)) add("invalid prior for " + p.name + ": " + why);
  }
  auto check_ref = [&](const std::string& pname, const char* where) {
    if (param_index(pname) < 0)
      add(std::string("unknown parameter '") + pname + "' referenced by " + where);
  };
  auto check_fn = [&](const ScalarFn& fn, const char* where) {
    for (const auto& f : fn.factors) {
      if (f.kind == RateFactor::Kind::Param || f.kind == RateFactor::Kind::OneMinusParam)
        check_ref(f.param, where);
      if (f.kind == RateFactor::Kind::Activity) {
        if (npi.kind == NpiSpec::Kind::None) add("activity factor used but no NPI declared");
        if (f.cohort < 0 || f.cohort >= n_cohorts) add("activity factor cohort out of range");
      }
    }
  };

  for (std::size_t xi = 0; xi < transitions.size(); ++xi) {
    const auto& tr = transitions[xi];
    std::ostringstream where;
    where << "transition " << xi << (tr.label.empty() ? "" : " (" + tr.label + ")");
    if (tr.stoich.size() != d) {
      add(where.str() + ": stoich length " + std::to_string(tr.stoich.size()) +
          " does not match state dimension " + std::to_string(d));
      continue;
    }
    if (const auto* lin = std::get_if<LinearRate>(&tr.rate)) {
      if (lin->source < 0 || lin->source >= d) add(where.str() + ": linear source out of range");
      check_fn(lin->coeff, where.str().c_str());
    } else {
      const auto& inf = std::get<InfectionRate>(tr.rate);
      if (inf.sus_cohort < 0 || inf.sus_cohort >= n_cohorts)
        add(where.str() + ": infection susceptible cohort out of range");
      if (inf.inf_class < 1 || inf.inf_class >= n_classes)
        add(where.str() + ": infection infectious class out of range");
      if (static_cast<int>(inf.per_contact.size()) != n_cohorts)
        add(where.str() + ": per-contact kernel list must have one entry per cohort");
      check_fn(inf.common, where.str().c_str());
      for (const auto& fn : inf.per_contact) check_fn(fn, where.str().c_str());
    }
  }

  // Non-susceptible classes never touched by any transition are unreachable.
  if (static_cast<int>(transitions.size()) > 0 && d > 0) {
    for (int cls = 1; cls < n_classes; ++cls) {
      bool touched = false;
      for (const auto& tr : transitions) {
        if (tr.stoich.size() != d) continue;
        for (int i = 0; i < n_cohorts && !touched; ++i)
          if (tr.stoich[compartment(i, cls)] != 0) touched = true;
        if (touched) break;
      }
      if (!touched)
        add("unreachable class " +
            (static_cast<int>(class_names.size()) == n_classes ? class_names[cls]
                                                               : std::to_string(cls)));
    }
  }

  if (npi.kind != NpiSpec::Kind::None) {
    check_ref(npi.t_lock_param, "NPI t_lock");
    check_ref(npi.w_lock_param, "NPI W_lock");
    if (static_cast<int>(npi.a_f_params.size()) != n_cohorts)
      add("NPI requires one a_F parameter per cohort");
    for (const auto& p : npi.a_f_params) check_ref(p, "NPI a_F");
    if (npi.kind == NpiSpec::Kind::Easing) check_ref(npi.r_param, "NPI easing factor");
  }

  if (init.mode == InitialConditionSpec::Mode::DominantMode) {
    if (init.kappa_param.empty())
      add("dominant-mode initial condition requires a kappa parameter");
    else
      check_ref(init.kappa_param, "initial condition kappa");
  } else if (init.base.size() != 0 && init.base.size() != d) {
    add("explicit initial condition has wrong length");
  }
  for (const auto& ov : init.overrides) {
    if (ov.compartment < 0 || ov.compartment >= d) add("initial override compartment out of range");
    if (ov.from_param) check_ref(ov.param, "initial override");
  }
  if (init.conservation_class >= n_classes) add("conservation class out of range");

  for (const auto& ob : observables) {
    if (ob.terms.empty()) add("observable '" + ob.name + "' has no terms");
    for (const auto& [idx, w] : ob.terms) {
      (void)w;
      if (idx < 0 || idx >= d) add("observable '" + ob.name + "' references bad compartment");
    }
  }

  return rep;
}

void ModelSpec::resolve_factor(RateFactor& f) {
  if (f.kind == RateFactor::Kind::Param || f.kind == RateFactor::Kind::OneMinusParam)
    f.param_index = param_index(f.param);
}

void ModelSpec::finalize() {
  if (class_names.empty())
    for (int c = 0; c < n_classes; ++c) class_names.push_back("class" + std::to_string(c));
  if (cohort_names.empty())
    for (int i = 0; i < n_cohorts; ++i) cohort_names.push_back("cohort" + std::to_string(i));
  if (cohort_fractions.size() == 0)
    cohort_fractions = Eigen::VectorXd::Constant(n_cohorts, 1.0 / n_cohorts);

  auto rep = validate();
  if (!rep.ok()) {
    std::ostringstream msg;
    msg << "invalid model:";
    for (const auto& v : rep.violations) msg << "\n  - " << v;
    throw std::invalid_argument(msg.str());
  }

  for (auto& tr : transitions) {
    if (auto* lin = std::get_if<LinearRate>(&tr.rate)) {
      for (auto& f : lin->coeff.factors) resolve_factor(f);
    } else {
      auto& inf = std::get<InfectionRate>(tr.rate);
      for (auto& f : inf.common.factors) resolve_factor(f);
      for (auto& fn : inf.per_contact)
        for (auto& f : fn.factors) resolve_factor(f);
    }
  }
  if (npi.kind != NpiSpec::Kind::None) {
    npi.t_lock_index = param_index(npi.t_lock_param);
    npi.w_lock_index = param_index(npi.w_lock_param);
    npi.a_f_indices.clear();
    for (const auto& p : npi.a_f_params) npi.a_f_indices.push_back(param_index(p));
    if (npi.kind == NpiSpec::Kind::Easing) npi.r_index = param_index(npi.r_param);
  }
  if (init.mode == InitialConditionSpec::Mode::DominantMode)
    init.kappa_index = param_index(init.kappa_param);
  for (auto& ov : init.overrides)
    if (ov.from_param) ov.param_index = param_index(ov.param);

  free_indices_.clear();
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i].fixed) free_indices_.push_back(static_cast<int>(i));

  finalized_ = true;
}

Eigen::VectorXd ModelSpec::expand(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free()) throw std::invalid_argument("theta length != free parameter count");
  Eigen::VectorXd full(params.size());
  for (std::size_t i = 0; i < params.size(); ++i)
    full[i] = params[i].fixed ? *params[i].fixed : 0.0;
  for (int k = 0; k < n_free(); ++k) full[free_indices_[k]] = theta[k];
  return full;
}

Eigen::VectorXd ModelSpec::npi_activity(double t, const Eigen::VectorXd& theta_full) const {
  Eigen::VectorXd a = Eigen::VectorXd::Ones(n_cohorts);
  if (npi.kind == NpiSpec::Kind::None) return a;
  const double t_lock = theta_full[npi.t_lock_index];
  const double w = theta_full[npi.w_lock_index];
  const double t0 = t_lock - 0.5 * w;
  const double t1 = t_lock + 0.5 * w;
  for (int i = 0; i < n_cohorts; ++i) {
    const double af = theta_full[npi.a_f_indices[i]];
    double ai;
    if (t <= t0) {
      ai = 1.0;
    } else if (t < t1) {
      ai = 1.0 + (af - 1.0) * (t - t0) / (t1 - t0);
    } else {
      ai = af;
      if (npi.kind == NpiSpec::Kind::Easing && npi.t_end > t1) {
        const double r = theta_full[npi.r_index];
        const double frac = std::min(1.0, (t - t1) / (npi.t_end - t1));
        ai = af + frac * r * (1.0 - af);
      }
    }
    a[i] = ai;
  }
  return a;
}

double ModelSpec::eval_scalar(const ScalarFn& fn, double t,
                              const Eigen::VectorXd& theta_full) const {
  double v = 1.0;
  for (const auto& f : fn.factors) {
    switch (f.kind) {
      case RateFactor::Kind::Constant:
        v *= f.value;
        break;
      case RateFactor::Kind::Param:
        v *= theta_full[f.param_index];
        break;
      case RateFactor::Kind::OneMinusParam:
        v *= 1.0 - theta_full[f.param_index];
        break;
      case RateFactor::Kind::Activity: {
        // Evaluated per factor; NPI activity is cheap and state-independent.
        const double t_lock = theta_full[npi.t_lock_index];
        const double w = theta_full[npi.w_lock_index];
        const double t0 = t_lock - 0.5 * w;
        const double t1 = t_lock + 0.5 * w;
        const double af = theta_full[npi.a_f_indices[f.cohort]];
        double ai;
        if (t <= t0)
          ai = 1.0;
        else if (t < t1)
          ai = 1.0 + (af - 1.0) * (t - t0) / (t1 - t0);
        else {
          ai = af;
          if (npi.kind == NpiSpec::Kind::Easing && npi.t_end > t1) {
            const double r = theta_full[npi.r_index];
            ai = af + std::min(1.0, (t - t1) / (npi.t_end - t1)) * r * (1.0 - af);
          }
        }
        v *= ai;
        break;
      }
    }
  }
  return v;
}

namespace {
// Shared rate kernel: state is n with scale `scale` (population counts with
// scale Omega, or fractions with scale 1).
double transition_rate(const ModelSpec& spec, const Transition& tr, double t,
                       const Eigen::VectorXd& theta_full, const Eigen::VectorXd& state,
                       double scale) {
  if (const auto* lin = std::get_if<LinearRate>(&tr.rate))
    return spec.eval_scalar(lin->coeff, t, theta_full) * state[lin->source];
  const auto& inf = std::get<InfectionRate>(tr.rate);
  const int s_idx = spec.compartment(inf.sus_cohort, 0);
  const double common = spec.eval_scalar(inf.common, t, theta_full);
  double acc = 0.0;
  for (int j = 0; j < spec.n_cohorts; ++j) {
    const double kj = spec.eval_scalar(inf.per_contact[j], t, theta_full);
    acc += kj * state[spec.compartment(j, inf.inf_class)];
  }
  return common * acc * state[s_idx] / scale;
}
}  // namespace

Eigen::VectorXd ModelSpec::rates(double t, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& n) const {
  const Eigen::VectorXd full = expand(theta);
  Eigen::VectorXd w(transitions.size());
  for (std::size_t xi = 0; xi < transitions.size(); ++xi) {
    double v = transition_rate(*this, transitions[xi], t, full, n, omega);
    if (v < 0.0) {
      if (v > -1e-12 * (1.0 + std::fabs(v)))
        v = 0.0;
      else
        throw std::runtime_error("negative evaluated rate in transition " + std::to_string(xi));
    }
    w[xi] = v;
  }
  return w;
}

Eigen::VectorXd ModelSpec::rates_per_capita(double t, const Eigen::VectorXd& theta,
                                            const Eigen::VectorXd& x) const {
  const Eigen::VectorXd full = expand(theta);
  Eigen::VectorXd w(transitions.size());
  for (std::size_t xi = 0; xi < transitions.size(); ++xi) {
    double v = transition_rate(*this, transitions[xi], t, full, x, 1.0);
    if (v < 0.0) {
      if (v > -1e-12 * (1.0 + std::fabs(v)))
        v = 0.0;
      else
        throw std::runtime_error("negative evaluated rate in transition " + std::to_string(xi));
    }
    w[xi] = v;
  }
  return w;
}

Eigen::VectorXd ModelSpec::drift(double t, const Eigen::VectorXd& theta,
                                 const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = rates_per_capita(t, theta, x);
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(dim());
  for (std::size_t xi = 0; xi < transitions.size(); ++xi)
    dx += w[xi] * transitions[xi].stoich.cast<double>();
  return dx;
}

Eigen::MatrixXd ModelSpec::drift_jacobian(double t, const Eigen::VectorXd& theta,
                                          const Eigen::VectorXd& x) const {
  const Eigen::VectorXd full = expand(theta);
  const int d = dim();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d, d);
  for (const auto& tr : transitions) {
    const Eigen::VectorXd r = tr.stoich.cast<double>();
    if (const auto* lin = std::get_if<LinearRate>(&tr.rate)) {
      jac.col(lin->source) += eval_scalar(lin->coeff, t, full) * r;
    } else {
      const auto& inf = std::get<InfectionRate>(tr.rate);
      const int s_idx = compartment(inf.sus_cohort, 0);
      const double common = eval_scalar(inf.common, t, full);
      double acc = 0.0;
      for (int j = 0; j < n_cohorts; ++j) {
        const double kj = common * eval_scalar(inf.per_contact[j], t, full);
        const int c_idx = compartment(j, inf.inf_class);
        acc += kj * x[c_idx];
        jac.col(c_idx) += kj * x[s_idx] * r;
      }
      jac.col(s_idx) += acc * r;
    }
  }
  return jac;
}

Eigen::MatrixXd ModelSpec::noise_matrix(double t, const Eigen::VectorXd& theta,
                                        const Eigen::VectorXd& x) const {
  const Eigen::VectorXd w = rates_per_capita(t, theta, x);
  const int d = dim();
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t xi = 0; xi < transitions.size(); ++xi) {
    if (w[xi] == 0.0) continue;
    const auto& r = transitions[xi].stoich;
    for (int i = 0; i < d; ++i) {
      if (r[i] == 0) continue;
      for (int j = 0; j < d; ++j) {
        if (r[j] == 0) continue;
        b(i, j) += w[xi] * r[i] * r[j];
      }
    }
  }
  return b;
}

Eigen::VectorXd ModelSpec::all_susceptible_state() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dim());
  for (int i = 0; i < n_cohorts; ++i) x[compartment(i, 0)] = cohort_fractions[i];
  return x;
}

Eigen::VectorXd ModelSpec::dominant_mode(const Eigen::VectorXd& theta_full) const {
  // Jacobian of the linearised dynamics about the all-susceptible state.
  Eigen::VectorXd theta_free(n_free());
  for (int k = 0; k < n_free(); ++k) theta_free[k] = theta_full[free_indices_[k]];
  const Eigen::MatrixXd jac = drift_jacobian(0.0, theta_free, all_susceptible_state());

  Eigen::EigenSolver<Eigen::MatrixXd> es(jac);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("initial_state: eigen decomposition failed");
  const auto& vals = es.eigenvalues();
  int lead = 0;
  for (int i = 1; i < vals.size(); ++i)
    if (vals[i].real() > vals[lead].real()) lead = i;
  const double scale = std::max(1.0, std::fabs(vals[lead].real()));
  if (std::fabs(vals[lead].imag()) > 1e-9 * scale)
    throw std::runtime_error("initial_state: leading eigenvalue is complex");
  double second = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < vals.size(); ++i)
    if (i != lead) second = std::max(second, vals[i].real());
  if (std::isfinite(second) && vals[lead].real() - second <= 1e-10 * scale)
    throw std::runtime_error("initial_state: degenerate leading eigenvalue");

  Eigen::VectorXd v = es.eigenvectors().col(lead).real();
  const double imag_norm = es.eigenvectors().col(lead).imag().norm();
  if (imag_norm > 1e-9 * v.norm())
    throw std::runtime_error("initial_state: leading eigenvector is complex");
  v /= v.cwiseAbs().sum();
  // Sign convention: the epidemic grows by depleting susceptibles.
  double s_sum = 0.0;
  for (int i = 0; i < n_cohorts; ++i) s_sum += v[compartment(i, 0)];
  if (s_sum > 0.0) v = -v;
  return v;
}

Eigen::VectorXd ModelSpec::initial_state(const Eigen::VectorXd& theta) const {
  const Eigen::VectorXd full = expand(theta);
  Eigen::VectorXd x;
  if (init.mode == InitialConditionSpec::Mode::DominantMode) {
    const double kappa = full[init.kappa_index];
    x = all_susceptible_state() + kappa * dominant_mode(full);
  } else {
    x = init.base.size() == dim() ? init.base : all_susceptible_state();
  }
  // Overrides are given in population counts, as observed data would be.
  for (const auto& ov : init.overrides) {
    const double counts = ov.from_param ? full[ov.param_index] : ov.value;
    x[ov.compartment] = counts / omega;
  }
  if (init.conservation_class >= 0) {
    for (int i = 0; i < n_cohorts; ++i) {
      double other = 0.0;
      for (int c = 0; c < n_classes; ++c)
        if (c != init.conservation_class) other += x[compartment(i, c)];
      const double fill = cohort_fractions[i] - other;
      if (fill < -1e-12)
        throw std::runtime_error("initial_state: infeasible configuration, cohort " +
                                 std::to_string(i) + " over-filled by " + std::to_string(-fill));
      x[compartment(i, init.conservation_class)] = std::max(0.0, fill);
    }
  }
  for (int i = 0; i < x.size(); ++i) {
    if (x[i] < -1e-12)
      throw std::runtime_error("initial_state: negative compartment fraction at index " +
                               std::to_string(i));
    x[i] = std::max(0.0, x[i]);
  }
  return x;
}

double ModelSpec::prior_logpdf(const Eigen::VectorXd& theta) const {
  if (theta.size() != n_free()) throw std::invalid_argument("theta length != free parameter count");
  double lp = 0.0;
  for (int k = 0; k < n_free(); ++k) {
    lp += params[free_indices_[k]].prior.logpdf(theta[k]);
    if (lp == kNegInf) return kNegInf;
  }
  return lp;
}

Eigen::VectorXd ModelSpec::sample_prior(Rng& rng) const {
  Eigen::VectorXd theta(n_free());
  for (int k = 0; k < n_free(); ++k) theta[k] = params[free_indices_[k]].prior.sample(rng);
  return theta;
}

Eigen::MatrixXd ModelSpec::filter_matrix() const {
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(observables.size(), dim());
  for (std::size_t r = 0; r < observables.size(); ++r)
    for (const auto& [idx, w] : observables[r].terms) f(r, idx) += w;
  return f;
}

}  // namespace epiclt
