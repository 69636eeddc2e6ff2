#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "wrgl/graph.hpp"

namespace wrgl {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct GeneralSolverConfig {
  double epsilon = 0.0;  // ball radius; 0 reduces to SAA
  double eta = 0.1;
  std::optional<double> beta;  // 0.5 * d when unset
  double q = 2.0;              // dual norm order, q in [1, inf]

  double pgd_tol = 1e-7;
  int max_iter = 20000;
  double ls_init = 1.0;
  double ls_shrink = 0.5;
  double ls_c = 1e-4;

  void validate() const;
  double beta_for(int d) const { return beta.value_or(0.5 * d); }
};

/// Hoelder conjugate of p: 1/p + 1/q = 1. Throws std::invalid_argument for p < 1.
double qnorm_dual(double p);

/// ||vec(M)||_q over every entry, diagonal included. q = kInfinity is the max norm.
double vec_qnorm(const Matrix& M, double q);

/// m(v) = Tr(Theta T v) + eta ||Tv||_F^2 + eps ||vec(Tv)||_q + beta (Tr(Tv) - d)^2.
double eval_objective_general(const WeightVector& v, const Matrix& theta,
                              const GeneralSolverConfig& config);

/// Gradient (or subgradient) of m. The norm term uses the signed power
/// sign(x)|x|^(q-1) / ||x||_q^(q-1); at Tv = 0 it contributes nothing.
/// For q = 1 zero entries take the sign of their feasible side (off-diagonal
/// -1, diagonal +1); for q = inf tied maxima share the weight equally.
Vector gradient_general(const WeightVector& v, const Matrix& theta,
                        const GeneralSolverConfig& config);

struct GeneralSolveResult {
  Laplacian laplacian;       // trace normalized to d
  WeightVector raw_weights;  // projected-gradient output before normalization
  double worst_case_risk = 0.0;  // Tr(L Theta) + eta ||L||_F^2 + eps ||vec L||_q
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

GeneralSolveResult solve_general(const Matrix& theta, const GeneralSolverConfig& config,
                                 const WeightVector& v0);

/// solve_general with epsilon forced to zero.
GeneralSolveResult solve_saa(const Matrix& theta, GeneralSolverConfig config,
                             const WeightVector& v0);
GeneralSolveResult solve_saa(const Matrix& theta, double eta, std::optional<double> beta,
                             const WeightVector& v0);

/// Closed form of sup_x x^T L x - gamma ||x - x_i||_2^2, namely
/// gamma^2 x_i^T (gamma I - L)^{-1} x_i - gamma ||x_i||^2.
/// Throws std::domain_error unless gamma > lambda_max(L).
double dual_inner_sup_oracle(const Laplacian& L, double gamma, const Vector& x);

}  // namespace wrgl
