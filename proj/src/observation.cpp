#include "epiclt/observation.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace epiclt {

void ObservationSet::validate() const {
  if (filter.rows() == 0) throw std::invalid_argument("observation set: empty filter");
  for (int r = 0; r < filter.rows(); ++r)
    if (filter.row(r).cwiseAbs().sum() == 0.0)
      throw std::invalid_argument("observation set: filter has an all-zero row");
  if (times.empty()) throw std::invalid_argument("observation set: no observation times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0)) throw std::invalid_argument("observation times must be positive");
    if (i > 0 && times[i] <= times[i - 1])
      throw std::invalid_argument("observation times must be strictly increasing");
  }
  if (y.size() != static_cast<Eigen::Index>(times.size()) * filter.rows())
    throw std::invalid_argument("observation vector length != m_obs * n_times");
}

ObservationSet ObservationSet::design() const {
  ObservationSet d = *this;
  d.y = Eigen::VectorXd::Zero(y.size());
  return d;
}

ObservationSet ObservationSet::truncated(int k) const {
  if (k <= 0 || k > n_times()) throw std::invalid_argument("truncated: bad length");
  ObservationSet out = *this;
  out.times.assign(times.begin(), times.begin() + k);
  out.y = y.head(static_cast<Eigen::Index>(k) * m_obs());
  return out;
}

ObservationSet load_observations(const std::string& path, const ModelSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open observation file: " + path);
  ObservationSet obs;
  obs.filter = spec.filter_matrix();
  obs.differenced = spec.differenced_obs;
  for (const auto& ob : spec.observables) obs.names.push_back(ob.name);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty observation file: " + path);
  // Header is informational; column order must match the declared observables.
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != obs.names.size() + 1)
      throw std::runtime_error("observation row has wrong column count in " + path);
    obs.times.push_back(row[0]);
    for (std::size_t c = 1; c < row.size(); ++c) values.push_back(row[c]);
  }
  obs.y = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  obs.validate();
  return obs;
}

void save_observations(const std::string& path, const ObservationSet& obs) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write observation file: " + path);
  out << "time";
  for (const auto& n : obs.names) out << ',' << n;
  out << '\n';
  out.precision(17);
  const int m = obs.m_obs();
  for (int t = 0; t < obs.n_times(); ++t) {
    out << obs.times[t];
    for (int c = 0; c < m; ++c) out << ',' << obs.y[t * m + c];
    out << '\n';
  }
}

}  // namespace epiclt
