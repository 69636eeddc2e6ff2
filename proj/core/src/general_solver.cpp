#include "wrgl/general_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wrgl/projected_gradient.hpp"

namespace wrgl {

void GeneralSolverConfig::validate() const {
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("general solver config: " + what);
  };
  if (!(epsilon >= 0.0)) fail("epsilon must be >= 0");
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (beta && !(*beta > 0.0)) fail("beta must be > 0");
  if (!(q >= 1.0)) fail("q must be >= 1");
  if (!(pgd_tol > 0.0)) fail("pgd_tol must be > 0");
  if (max_iter < 1) fail("max_iter must be >= 1");
  if (!(ls_shrink > 0.0 && ls_shrink < 1.0)) fail("ls_shrink must be in (0, 1)");
  if (!(ls_c > 0.0 && ls_c < 1.0)) fail("ls_c must be in (0, 1)");
  if (!(ls_init > 0.0)) fail("ls_init must be > 0");
}

double qnorm_dual(double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("norm order p must be >= 1");
  if (p == 1.0) return kInfinity;
  if (std::isinf(p)) return 1.0;
  return p / (p - 1.0);
}

double vec_qnorm(const Matrix& M, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("norm order q must be >= 1");
  const double peak = M.cwiseAbs().maxCoeff();
  if (std::isinf(q)) return peak;
  if (q == 1.0) return M.cwiseAbs().sum();
  if (q == 2.0) return M.norm();
  if (peak == 0.0) return 0.0;
  return peak * std::pow((M.cwiseAbs() / peak).array().pow(q).sum(), 1.0 / q);
}

namespace {

bool nonsmooth_norm(double q) { return std::isinf(q); }

Matrix norm_subgradient(const Matrix& L, double q) {
  const Eigen::Index d = L.rows();
  Matrix G = Matrix::Zero(d, d);
  const double peak = L.cwiseAbs().maxCoeff();
  if (std::isinf(q)) {
    if (peak == 0.0) return G;
    const double cut = peak * (1.0 - 1e-12);
    int ties = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(L(i, j)) >= cut) ++ties;
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        if (std::abs(L(i, j)) >= cut) G(i, j) = (L(i, j) > 0.0 ? 1.0 : -1.0) / ties;
    return G;
  }
  if (q == 1.0) {
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) {
        if (L(i, j) > 0.0) {
          G(i, j) = 1.0;
        } else if (L(i, j) < 0.0) {
          G(i, j) = -1.0;
        } else {
          G(i, j) = i == j ? 1.0 : -1.0;
        }
      }
    }
    return G;
  }
  if (peak == 0.0) return G;
  const double norm = vec_qnorm(L, q);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const double x = L(i, j);
      if (x == 0.0) continue;
      const double mag = std::pow(std::abs(x) / norm, q - 1.0);
      G(i, j) = x > 0.0 ? mag : -mag;
    }
  }
  return G;
}

struct GeneralProblem {
  int d;
  Vector linear;  // T* Theta
  double eta;
  double epsilon;
  double beta;
  double q;

  double value(const Vector& v) const {
    const Matrix L = apply_t(v, d);
    const double gap = L.trace() - static_cast<double>(d);
    double out = linear.dot(v) + eta * L.squaredNorm() + beta * gap * gap;
    if (epsilon > 0.0) out += epsilon * vec_qnorm(L, q);
    return out;
  }

  Vector gradient(const Vector& v) const {
    const Matrix L = apply_t(v, d);
    const double gap = L.trace() - static_cast<double>(d);
    Vector g = linear + 2.0 * eta * apply_t_adjoint(L) + Vector::Constant(v.size(), 4.0 * beta * gap);
    if (epsilon > 0.0) g += epsilon * apply_t_adjoint(norm_subgradient(L, q));
    return g;
  }
};

GeneralProblem make_problem(const Matrix& theta, const GeneralSolverConfig& config, int d) {
  if (theta.rows() != d || theta.cols() != d) {
    throw std::invalid_argument("Theta dimension does not match the weight vector");
  }
  return GeneralProblem{d, apply_t_adjoint(theta), config.eta, config.epsilon,
                        config.beta_for(d), config.q};
}

}  // namespace

double eval_objective_general(const WeightVector& v, const Matrix& theta,
                              const GeneralSolverConfig& config) {
  config.validate();
  return make_problem(theta, config, v.dim()).value(v.values());
}

Vector gradient_general(const WeightVector& v, const Matrix& theta,
                        const GeneralSolverConfig& config) {
  config.validate();
  return make_problem(theta, config, v.dim()).gradient(v.values());
}

GeneralSolveResult solve_general(const Matrix& theta, const GeneralSolverConfig& config,
                                 const WeightVector& v0) {
  config.validate();
  const int d = v0.dim();
  const GeneralProblem problem = make_problem(theta, config, d);

  PgdOptions options;
  options.tol = config.pgd_tol;
  options.max_iter = config.max_iter;
  options.ls_init = config.ls_init;
  options.ls_shrink = config.ls_shrink;
  options.ls_c = config.ls_c;
  options.nonsmooth = config.epsilon > 0.0 && nonsmooth_norm(config.q);

  PgdOutcome outcome = projected_gradient_descent(
      [&](const Vector& v) -> std::optional<double> { return problem.value(v); },
      [&](const Vector& v) { return problem.gradient(v); }, v0.values(), options);

  WeightVector raw(d, std::move(outcome.x));
  Laplacian L = raw.values().sum() > 0.0 ? weights_to_laplacian(normalize_trace(raw))
                                         : Laplacian::zero(d);
  double risk = (L.matrix().cwiseProduct(theta)).sum() + config.eta * L.matrix().squaredNorm();
  if (config.epsilon > 0.0) risk += config.epsilon * vec_qnorm(L.matrix(), config.q);

  return GeneralSolveResult{std::move(L),         std::move(raw),     risk,
                            std::move(outcome.trace), outcome.iterations, outcome.converged};
}

GeneralSolveResult solve_saa(const Matrix& theta, GeneralSolverConfig config,
                             const WeightVector& v0) {
  config.epsilon = 0.0;
  return solve_general(theta, config, v0);
}

GeneralSolveResult solve_saa(const Matrix& theta, double eta, std::optional<double> beta,
                             const WeightVector& v0) {
  GeneralSolverConfig config;
  config.eta = eta;
  config.beta = beta;
  return solve_saa(theta, config, v0);
}

double dual_inner_sup_oracle(const Laplacian& L, double gamma, const Vector& x) {
  const int d = L.dim();
  if (x.size() != d) throw std::invalid_argument("sample dimension does not match L");
  if (!(gamma > max_eigenvalue(L) + 1e-12)) {
    throw std::domain_error("dual_inner_sup_oracle needs gamma > lambda_max(L)");
  }
  const Matrix A = gamma * Matrix::Identity(d, d) - L.matrix();
  // gamma^2 A^-1 - gamma I = gamma A^-1 L
  const Vector y = A.llt().solve(L.matrix() * x);
  return gamma * x.dot(y);
}

}  // namespace wrgl
