#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "epiclt/model.hpp"

namespace epiclt {

/// Observed data: a filter matrix selecting linear combinations of
/// compartments, the observation times, and the stacked data vector.
/// When `differenced` is set, y holds increments of the filtered quantities
/// over (t_{mu-1}, t_mu], with t_0 = 0 the (parameterised) window start.
struct ObservationSet {
  Eigen::MatrixXd filter;      // m_obs x (M*L)
  std::vector<double> times;   // strictly increasing, all > 0
  Eigen::VectorXd y;           // length m_obs * times.size()
  bool differenced = false;
  std::vector<std::string> names;

  int m_obs() const { return static_cast<int>(filter.rows()); }
  int n_times() const { return static_cast<int>(times.size()); }
  void validate() const;  // throws std::invalid_argument on contract violations

  /// Design-only copy (times and filter, no data) for information computations.
  ObservationSet design() const;

  /// Restriction to the first k observation times.
  ObservationSet truncated(int k) const;
};

/// Reads `time, <name>, <name>, ...` CSV rows; the filter and differencing
/// convention come from the model's declared observables.
ObservationSet load_observations(const std::string& path, const ModelSpec& spec);

void save_observations(const std::string& path, const ObservationSet& obs);

}  // namespace epiclt
