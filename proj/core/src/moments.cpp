#include "wrgl/moments.hpp"

#include <stdexcept>

namespace wrgl {

EmpiricalMoments empirical_moments(const SignalMatrix& X) {
  if (X.cols() < 1 || X.rows() < 1) {
    throw std::invalid_argument("signal matrix needs at least one row and one sample");
  }
  if (!X.allFinite()) {
    throw std::invalid_argument("signal matrix contains non-finite entries");
  }
  const double n = static_cast<double>(X.cols());

  EmpiricalMoments m;
  m.samples = static_cast<int>(X.cols());
  m.mean = X.rowwise().sum() / n;
  const Matrix centered = X.colwise() - m.mean;
  m.covariance = centered * centered.transpose() / n;
  m.covariance = 0.5 * (m.covariance + m.covariance.transpose());
  m.second_moment = X * X.transpose() / n;
  m.second_moment = 0.5 * (m.second_moment + m.second_moment.transpose());
  return m;
}

}  // namespace wrgl
