#pragma once

#include "wrgl/graph.hpp"

namespace wrgl {

/// d x N signal matrix; column i is observation x_i.
using SignalMatrix = Matrix;

/// Empirical statistics of a signal matrix. The uncentered second moment
/// (1/N) sum x_i x_i^T is stored once; it is both Sigma_x = Sigma_n + mu mu^T
/// (Gaussian solver) and Theta_n (general solver).
struct EmpiricalMoments {
  Vector mean;
  Matrix covariance;     // normalized by N
  Matrix second_moment;  // (1/N) X X^T
  int samples = 0;

  int dim() const { return static_cast<int>(mean.size()); }
  const Matrix& sigma_x() const { return second_moment; }
  const Matrix& theta() const { return second_moment; }
};

/// Throws std::invalid_argument for an empty or non-finite signal matrix.
EmpiricalMoments empirical_moments(const SignalMatrix& X);

}  // namespace wrgl
