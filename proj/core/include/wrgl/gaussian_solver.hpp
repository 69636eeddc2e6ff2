#pragma once

#include <optional>
#include <vector>

#include "wrgl/graph.hpp"
#include "wrgl/moments.hpp"

namespace wrgl {

struct GaussianSolverConfig {
  double epsilon = 0.1;  // Wasserstein radius
  double eta = 0.1;      // Frobenius weight
  std::optional<double> beta;  // trace-penalty weight; 0.5 * d when unset

  double bracket_a = 10.0;  // initial upper bound a * lambda_max
  double bracket_b = 1e-6;  // initial lower bound lambda_max + b
  double bisect_tol = 1e-6;
  int max_iter_bisect = 200;
  int max_doublings = 60;

  double pgd_tol = 1e-7;
  int max_iter_pgd = 5000;
  double ls_init = 1.0;
  double ls_shrink = 0.5;
  double ls_c = 1e-4;

  double bcd_tol = 1e-6;
  int max_iter_bcd = 200;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  double beta_for(int d) const { return beta.value_or(0.5 * d); }
};

/// Spectral view of g(., L) for a fixed Laplacian: with L = U diag(lambda) U^T
/// and s = diag(U^T Sigma_x U),
///   g(gamma)   = gamma eps^2 + sum_k s_k gamma lambda_k / (gamma - lambda_k) + eta ||L||_F^2
///   g'(gamma)  = eps^2 - sum_k s_k lambda_k^2 / (gamma - lambda_k)^2
/// Both need only O(d) work per gamma once the profile is built.
class GammaProfile {
 public:
  GammaProfile(const Laplacian& L, const Matrix& sigma_x);

  double lambda_max() const { return lambda_max_; }
  double value(double gamma, double epsilon, double eta) const;
  double derivative(double gamma, double epsilon) const;

 private:
  void check_domain(double gamma) const;

  Vector lambda_;
  Vector weight_;
  double lambda_max_;
  double frobenius_sq_;
};

/// g(gamma, L) = gamma (eps^2 - Tr Sigma_x) + gamma^2 Tr((gamma I - L)^{-1} Sigma_x) + eta ||L||_F^2.
/// Throws std::domain_error unless gamma > lambda_max(L).
double eval_g(double gamma, const Laplacian& L, const Matrix& sigma_x, double epsilon, double eta);

/// dg/dgamma = eps^2 - Tr((I - gamma (gamma I - L)^{-1})^2 Sigma_x).
double eval_g_gamma(double gamma, const Laplacian& L, const Matrix& sigma_x, double epsilon);

struct BisectionResult {
  double gamma = 0.0;
  int iterations = 0;
  bool converged = false;
  /// No sign change of g' on (lambda_max, inf): the infimum sits at the pole.
  bool degenerate = false;
};

/// Root of g'(., L) by bisection on [lambda_max + b, a * lambda_max], growing
/// the upper end by doubling until g' turns positive.
BisectionResult bisection_gamma(const Laplacian& L, const Matrix& sigma_x, double epsilon,
                                const GaussianSolverConfig& config);

/// r(v) = gamma^2 Tr(Sigma_x (gamma I - Tv)^{-1}) + eta ||Tv||_F^2 + beta (Tr(Tv) - d)^2,
/// or nullopt when gamma I - Tv is not positive definite.
std::optional<double> gaussian_laplacian_objective(double gamma, const Matrix& sigma_x,
                                                   double eta, double beta, const Vector& v,
                                                   int d);

/// Gradient of r: gamma^2 T*((gamma I - Tv)^{-1} Sigma_x (gamma I - Tv)^{-1})
///   + 2 eta T*Tv + 2 beta (Tr(Tv) - d) T*I.
Vector gaussian_laplacian_gradient(double gamma, const Matrix& sigma_x, double eta, double beta,
                                   const Vector& v, int d);

struct LaplacianUpdate {
  WeightVector weights;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Minimizes r over v >= 0 by projected gradient from v0. Throws
/// std::domain_error if gamma <= lambda_max(T v0).
LaplacianUpdate update_laplacian_gaussian(double gamma, const Matrix& sigma_x,
                                          const GaussianSolverConfig& config,
                                          const WeightVector& v0);

struct GaussianSolveResult {
  Laplacian laplacian;       // trace normalized to d
  WeightVector raw_weights;  // block-coordinate output before normalization
  double gamma = 0.0;        // dual optimum for `laplacian`
  double worst_case_risk = 0.0;  // g(gamma, laplacian)
  std::vector<double> objective_trace;  // g + beta (Tr - d)^2 per outer iteration
  int iterations = 0;
  bool converged = false;
  bool degenerate_bisection = false;
};

/// Block coordinate descent: alternate the gamma bisection and the Laplacian
/// projected-gradient update from the uniform complete graph.
GaussianSolveResult solve_gaussian(const EmpiricalMoments& moments,
                                   const GaussianSolverConfig& config);

}  // namespace wrgl
