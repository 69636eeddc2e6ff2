#include "wrgl/gaussian_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "wrgl/projected_gradient.hpp"

namespace wrgl {

void GaussianSolverConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("gaussian solver config: " + what);
  };
  if (!(epsilon >= 0.0)) fail("epsilon must be >= 0");
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (beta && !(*beta > 0.0)) fail("beta must be > 0");
  if (!(bracket_a > 1.0)) fail("bracket_a must be > 1");
  if (!(bracket_b > 0.0)) fail("bracket_b must be > 0");
  if (!(bisect_tol > 0.0 && pgd_tol > 0.0 && bcd_tol > 0.0)) fail("tolerances must be > 0");
  if (max_iter_bisect < 1 || max_iter_pgd < 1 || max_iter_bcd < 1 || max_doublings < 1) {
    fail("iteration caps must be >= 1");
  }
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) fail("ls_shrink must be in (0, 1)");
  if (!(ls_c > 0.0 && ls_c < 1.0)) fail("ls_c must be in (0, 1)");
  if (!(ls_init > 0.0)) fail("ls_init must be > 0");
}

GammaProfile::GammaProfile(const Laplacian& L, const Matrix& sigma_x) {
  if (sigma_x.rows() != L.dim() || sigma_x.cols() != L.dim()) {
    throw std::invalid_argument("Sigma_x dimension does not match the Laplacian");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(L.matrix());
  lambda_ = eig.eigenvalues();
  weight_ = (eig.eigenvectors().transpose() * sigma_x * eig.eigenvectors()).diagonal();
  lambda_max_ = lambda_.maxCoeff();
  frobenius_sq_ = L.matrix().squaredNorm();
}

void GammaProfile::check_domain(double gamma) const {
  if (!(gamma > lambda_max_ + 1e-12 * std::max(1.0, std::abs(lambda_max_)))) {
    throw std::domain_error("gamma must exceed lambda_max(L) = " + std::to_string(lambda_max_));
  }
}

double GammaProfile::value(double gamma, double epsilon, double eta) const {
  check_domain(gamma);
  // gamma^2/(gamma - l) - gamma = gamma l / (gamma - l)
  double acc = 0.0;
  for (Eigen::Index k = 0; k < lambda_.size(); ++k) {
    acc += weight_(k) * gamma * lambda_(k) / (gamma - lambda_(k));
  }
  return gamma * epsilon * epsilon + acc + eta * frobenius_sq_;
}

double GammaProfile::derivative(double gamma, double epsilon) const {
  check_domain(gamma);
  double acc = 0.0;
  for (Eigen::Index k = 0; k < lambda_.size(); ++k) {
    const double r = lambda_(k) / (gamma - lambda_(k));
    acc += weight_(k) * r * r;
  }
  return epsilon * epsilon - acc;
}

double eval_g(double gamma, const Laplacian& L, const Matrix& sigma_x, double epsilon,
              double eta) {
  return GammaProfile(L, sigma_x).value(gamma, epsilon, eta);
}

double eval_g_gamma(double gamma, const Laplacian& L, const Matrix& sigma_x, double epsilon) {
  return GammaProfile(L, sigma_x).derivative(gamma, epsilon);
}

namespace {

BisectionResult bisect(const GammaProfile& profile, double epsilon,
                       const GaussianSolverConfig& config) {
  const double lam = profile.lambda_max();
  double lb = lam + config.bracket_b;
  double ub = std::max(config.bracket_a * lam, 2.0 * lb);

  BisectionResult out;
  if (profile.derivative(lb, epsilon) >= 0.0) {
    out.gamma = lb + config.bisect_tol;
    out.degenerate = true;
    return out;
  }
  int doublings = 0;
  while (profile.derivative(ub, epsilon) <= 0.0) {
    if (++doublings > config.max_doublings) {
      out.gamma = lb + config.bisect_tol;
      out.degenerate = true;
      return out;
    }
    lb = ub;
    ub *= 2.0;
  }

  double d_lb = profile.derivative(lb, epsilon);
  double d_ub = profile.derivative(ub, epsilon);
  int it = 0;
  while (ub - lb > config.bisect_tol && it < config.max_iter_bisect) {
    const double mid = 0.5 * (lb + ub);
    if (mid <= lb || mid >= ub) break;  // bracket at machine resolution
    const double d_mid = profile.derivative(mid, epsilon);
    if (d_mid < 0.0) {
      lb = mid;
      d_lb = d_mid;
    } else {
      ub = mid;
      d_ub = d_mid;
    }
    ++it;
  }
  // False-position point of the final bracket.
  out.gamma = std::clamp(lb - d_lb * (ub - lb) / (d_ub - d_lb), lb, ub);
  out.iterations = it;
  out.converged = ub - lb <= config.bisect_tol || it < config.max_iter_bisect;
  return out;
}

double trace_penalty(const Laplacian& L, double beta) {
  const double gap = L.trace() - static_cast<double>(L.dim());
  return beta * gap * gap;
}

// Cholesky of gamma I - L with every pivot above round-off.
bool positive_definite(const Eigen::LLT<Matrix>& llt, double gamma) {
  if (llt.info() != Eigen::Success) return false;
  const double floor =
      std::sqrt(64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(gamma)));
  return (llt.matrixLLT().diagonal().array() > floor).all();
}

}  // namespace

BisectionResult bisection_gamma(const Laplacian& L, const Matrix& sigma_x, double epsilon,
                                const GaussianSolverConfig& config) {
  config.validate();
  return bisect(GammaProfile(L, sigma_x), epsilon, config);
}

std::optional<double> gaussian_laplacian_objective(double gamma, const Matrix& sigma_x,
                                                   double eta, double beta, const Vector& v,
                                                   int d) {
  const Matrix L = apply_t(v, d);
  const Matrix A = gamma * Matrix::Identity(d, d) - L;
  const Eigen::LLT<Matrix> llt(A);
  if (!positive_definite(llt, gamma)) {
    return std::nullopt;
  }
  // gamma^2 Tr(Sigma A^-1) = gamma Tr(Sigma) + gamma Tr(Sigma A^-1 L)
  const Matrix AinvL = llt.solve(L);
  const double fractional =
      gamma * sigma_x.trace() + gamma * (sigma_x.cwiseProduct(AinvL.transpose())).sum();
  const double gap = L.trace() - static_cast<double>(d);
  return fractional + eta * L.squaredNorm() + beta * gap * gap;
}

Vector gaussian_laplacian_gradient(double gamma, const Matrix& sigma_x, double eta, double beta,
                                   const Vector& v, int d) {
  const Matrix L = apply_t(v, d);
  const Matrix A = gamma * Matrix::Identity(d, d) - L;
  const Eigen::LLT<Matrix> llt(A);
  if (!positive_definite(llt, gamma)) {
    throw std::domain_error("gamma I - Tv is not positive definite");
  }
  const Matrix AinvSigma = llt.solve(sigma_x);
  Matrix inner = llt.solve(AinvSigma.transpose());  // A^-1 Sigma A^-1
  inner = 0.5 * (inner + inner.transpose());
  const double gap = L.trace() - static_cast<double>(d);
  // T*I = 2 for every edge.
  return gamma * gamma * apply_t_adjoint(inner) + 2.0 * eta * apply_t_adjoint(L) +
         Vector::Constant(v.size(), 4.0 * beta * gap);
}

LaplacianUpdate update_laplacian_gaussian(double gamma, const Matrix& sigma_x,
                                          const GaussianSolverConfig& config,
                                          const WeightVector& v0) {
  config.validate();
  const int d = v0.dim();
  if (sigma_x.rows() != d || sigma_x.cols() != d) {
    throw std::invalid_argument("Sigma_x dimension does not match the weight vector");
  }
  const double beta = config.beta_for(d);
  const double eta = config.eta;
  if (!gaussian_laplacian_objective(gamma, sigma_x, eta, beta, v0.values(), d)) {
    throw std::domain_error("update_laplacian_gaussian: gamma must exceed lambda_max(T v0)");
  }

  PgdOptions options;
  options.tol = config.pgd_tol;
  options.max_iter = config.max_iter_pgd;
  options.ls_init = config.ls_init;
  options.ls_shrink = config.ls_shrink;
  options.ls_c = config.ls_c;

  PgdOutcome outcome = projected_gradient_descent(
      [&](const Vector& v) { return gaussian_laplacian_objective(gamma, sigma_x, eta, beta, v, d); },
      [&](const Vector& v) { return gaussian_laplacian_gradient(gamma, sigma_x, eta, beta, v, d); },
      v0.values(), options);

  return LaplacianUpdate{WeightVector(d, std::move(outcome.x)), outcome.objective,
                         outcome.iterations, outcome.converged};
}

GaussianSolveResult solve_gaussian(const EmpiricalMoments& moments,
                                   const GaussianSolverConfig& config) {
  config.validate();
  if (!(config.epsilon > 0.0)) {
    throw std::invalid_argument("solve_gaussian needs epsilon > 0");
  }
  const int d = moments.dim();
  if (d < 2) throw std::invalid_argument("solve_gaussian needs d >= 2");
  const Matrix& sigma_x = moments.sigma_x();
  const double beta = config.beta_for(d);
  const double eps = config.epsilon;
  const double eta = config.eta;

  WeightVector v = uniform_complete_weights(d);
  Laplacian L = weights_to_laplacian(v);

  std::vector<double> trace;
  bool degenerate = false;
  bool converged = false;
  std::optional<double> gamma_prev;
  int iter = 0;

  while (iter < config.max_iter_bcd) {
    ++iter;
    const GammaProfile profile(L, sigma_x);
    const BisectionResult bis = bisect(profile, eps, config);
    degenerate = degenerate || bis.degenerate;
    double gamma = bis.gamma;
    // Keep the previous gamma if it scores lower.
    if (gamma_prev && *gamma_prev > profile.lambda_max()) {
      if (profile.value(*gamma_prev, eps, eta) < profile.value(gamma, eps, eta)) {
        gamma = *gamma_prev;
      }
    }

    const LaplacianUpdate update = update_laplacian_gaussian(gamma, sigma_x, config, v);
    Laplacian L_next = weights_to_laplacian(update.weights);
    trace.push_back(GammaProfile(L_next, sigma_x).value(gamma, eps, eta) +
                    trace_penalty(L_next, beta));

    const double change = (L_next.matrix() - L.matrix()).norm();
    v = update.weights;
    L = std::move(L_next);
    gamma_prev = gamma;
    if (change < config.bcd_tol) {
      converged = true;
      break;
    }
  }

  const WeightVector raw = v;
  Laplacian final_L = raw.values().sum() > 0.0 ? weights_to_laplacian(normalize_trace(raw))
                                               : Laplacian::zero(d);
  const GammaProfile final_profile(final_L, sigma_x);
  const BisectionResult final_bis = bisect(final_profile, eps, config);
  degenerate = degenerate || final_bis.degenerate;

  return GaussianSolveResult{std::move(final_L),
                             raw,
                             final_bis.gamma,
                             final_profile.value(final_bis.gamma, eps, eta),
                             std::move(trace),
                             iter,
                             converged,
                             degenerate};
}

}  // namespace wrgl
