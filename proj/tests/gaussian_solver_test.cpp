#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "wrgl/gaussian_solver.hpp"
#include "wrgl/general_solver.hpp"
#include "wrgl/metrics.hpp"

namespace wrgl {
namespace {

Laplacian path2() {
  Matrix m(2, 2);
  m << 1, -1, -1, 1;
  return Laplacian::from_matrix(m);
}

// g by the defining formula with an explicit inverse.
double g_direct(double gamma, const Matrix& L, const Matrix& S, double eps, double eta) {
  const Eigen::Index d = L.rows();
  const Matrix A = gamma * Matrix::Identity(d, d) - L;
  return gamma * (eps * eps - S.trace()) + gamma * gamma * A.inverse().cwiseProduct(S).sum() +
         eta * L.squaredNorm();
}

Matrix random_spd(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix B(d, d + 2);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d + 2; ++j) B(i, j) = n(rng);
  return B * B.transpose() / (d + 2) + 0.05 * Matrix::Identity(d, d);
}

TEST(EvalG, Examples) {
  const Laplacian zero = Laplacian::zero(3);
  EXPECT_NEAR(eval_g(2.5, zero, Matrix::Identity(3, 3), 0.3, 0.0), 2.5 * 0.09, 1e-14);
  for (double eps : {0.0, 0.5, 1.0, 2.0}) {
    for (double eta : {0.0, 0.1, 1.0}) {
      EXPECT_NEAR(eval_g(4.0, path2(), Matrix::Identity(2, 2), eps, eta),
                  4 * eps * eps + 4 + 4 * eta, 1e-12);
    }
  }
}

TEST(EvalG, MatchesDefinition) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int d = 2 + rep % 5;
    Vector v(static_cast<Eigen::Index>(edge_count(d)));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = u(rng);
    const Laplacian L = weights_to_laplacian(WeightVector(d, v));
    const Matrix S = random_spd(d, rng);
    const double gamma = max_eigenvalue(L) + 0.01 + 3 * u(rng);
    EXPECT_NEAR(eval_g(gamma, L, S, 0.4, 0.2), g_direct(gamma, L.matrix(), S, 0.4, 0.2),
                1e-9 * std::abs(g_direct(gamma, L.matrix(), S, 0.4, 0.2)));
  }
}

TEST(EvalG, BlowsUpAtPole) {
  double prev = 0.0;
  for (double gap : {1e-1, 1e-3, 1e-6, 1e-9}) {
    const double value = eval_g(2.0 + gap, path2(), Matrix::Identity(2, 2), 0.1, 0.1);
    EXPECT_GT(value, prev);
    prev = value;
  }
  EXPECT_GT(prev, 1e8);
}

TEST(EvalG, DomainError) {
  EXPECT_THROW(eval_g(2.0, path2(), Matrix::Identity(2, 2), 0.1, 0.1), std::domain_error);
  EXPECT_THROW(eval_g(1.0, path2(), Matrix::Identity(2, 2), 0.1, 0.1), std::domain_error);
  EXPECT_THROW(eval_g_gamma(2.0, path2(), Matrix::Identity(2, 2), 0.1), std::domain_error);
  EXPECT_THROW(eval_g(3.0, path2(), Matrix::Identity(3, 3), 0.1, 0.1), std::invalid_argument);
}

TEST(EvalGGamma, Examples) {
  EXPECT_NEAR(eval_g_gamma(4.0, path2(), Matrix::Identity(2, 2), 1.0), 0.0, 1e-14);
  for (double gamma : {1e-3, 1.0, 50.0}) {
    EXPECT_EQ(eval_g_gamma(gamma, Laplacian::zero(3), Matrix::Identity(3, 3), 0.7), 0.7 * 0.7);
  }
}

TEST(EvalGGamma, MatchesFiniteDifference) {
  std::mt19937_64 rng(4);
  const Matrix S = random_spd(4, rng);
  const Laplacian L = weights_to_laplacian(WeightVector(4, Vector{{0.3, 1.0, 0.2, 0.7, 0.1, 0.5}}));
  for (double gamma : {max_eigenvalue(L) + 0.1, 5.0, 20.0}) {
    const double h = 1e-5 * gamma;
    const double fd =
        (eval_g(gamma + h, L, S, 0.3, 0.1) - eval_g(gamma - h, L, S, 0.3, 0.1)) / (2 * h);
    EXPECT_NEAR(eval_g_gamma(gamma, L, S, 0.3), fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Bisection, AnalyticRoots) {
  const GaussianSolverConfig cfg;
  const BisectionResult one = bisection_gamma(path2(), Matrix::Identity(2, 2), 1.0, cfg);
  EXPECT_NEAR(one.gamma, 4.0, cfg.bisect_tol);
  EXPECT_TRUE(one.converged);
  EXPECT_FALSE(one.degenerate);
  const BisectionResult two = bisection_gamma(path2(), Matrix::Identity(2, 2), 2.0, cfg);
  EXPECT_NEAR(two.gamma, 3.0, cfg.bisect_tol);
}

TEST(Bisection, UpperBoundDoubles) {
  // Root at gamma = 2 + 2/eps far above the initial bracket [2, 20].
  const GaussianSolverConfig cfg;
  const BisectionResult r = bisection_gamma(path2(), Matrix::Identity(2, 2), 0.01, cfg);
  EXPECT_NEAR(r.gamma, 202.0, cfg.bisect_tol);
}

TEST(Bisection, ZeroLaplacianIsDegenerate) {
  const GaussianSolverConfig cfg;
  const BisectionResult r = bisection_gamma(Laplacian::zero(3), Matrix::Identity(3, 3), 0.5, cfg);
  EXPECT_TRUE(r.degenerate);
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.gamma, cfg.bracket_b + cfg.bisect_tol, 1e-15);
}

TEST(Bisection, DerivativeVanishesAtRoot) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const GaussianSolverConfig cfg;
  for (int rep = 0; rep < 50; ++rep) {
    const int d = 2 + rep % 6;
    Vector v(static_cast<Eigen::Index>(edge_count(d)));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = u(rng);
    const Laplacian L = weights_to_laplacian(WeightVector(d, v));
    const Matrix S = random_spd(d, rng);
    const double eps = 0.1 + 1.9 * u(rng);
    const BisectionResult r = bisection_gamma(L, S, eps, cfg);
    if (r.degenerate) continue;
    EXPECT_NEAR(eval_g_gamma(r.gamma, L, S, eps), 0.0, 1e-5);
  }
}

TEST(GaussianLaplacianObjective, MatchesDefinitionAndDomain) {
  const Matrix S = Matrix::Identity(2, 2);
  const Vector v = Vector::Constant(1, 0.5);
  const Matrix L = apply_t(v, 2);
  const Matrix A = 4.0 * Matrix::Identity(2, 2) - L;
  const double expected = 16.0 * A.inverse().trace() + 0.1 * L.squaredNorm() + 10.0 * 1.0;
  EXPECT_NEAR(*gaussian_laplacian_objective(4.0, S, 0.1, 10.0, v, 2), expected, 1e-12);
  EXPECT_FALSE(gaussian_laplacian_objective(4.0, S, 0.1, 10.0, Vector::Constant(1, 2.0), 2));
  EXPECT_FALSE(gaussian_laplacian_objective(4.0, S, 0.1, 10.0, Vector::Constant(1, 3.0), 2));
}

TEST(UpdateLaplacianGaussian, OneDimensionalGridOracle) {
  GaussianSolverConfig cfg;
  cfg.eta = 0.1;
  cfg.beta = 10.0;
  const Matrix S = Matrix::Identity(2, 2);
  double best_v = 0.0;
  double best_f = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 190000; ++k) {
    const double v = k * 1e-5;
    const double f = *gaussian_laplacian_objective(4.0, S, 0.1, 10.0, Vector::Constant(1, v), 2);
    if (f < best_f) {
      best_f = f;
      best_v = v;
    }
  }
  const LaplacianUpdate up = update_laplacian_gaussian(4.0, S, cfg, WeightVector::constant(2, 1.0));
  EXPECT_NEAR(up.weights[0], best_v, 1e-3);
  EXPECT_TRUE(up.converged);
}

TEST(UpdateLaplacianGaussian, LargeBetaEnforcesTrace) {
  GaussianSolverConfig cfg;
  cfg.beta = 1e6;
  const LaplacianUpdate up = update_laplacian_gaussian(4.0, Matrix::Identity(2, 2), cfg,
                                                       WeightVector::constant(2, 0.2));
  EXPECT_NEAR(weights_to_laplacian(up.weights).trace(), 2.0, 1e-2);
}

TEST(UpdateLaplacianGaussian, InfeasibleStartThrows) {
  EXPECT_THROW(update_laplacian_gaussian(1.0, Matrix::Identity(2, 2), GaussianSolverConfig{},
                                         WeightVector::constant(2, 1.0)),
               std::domain_error);
}

TEST(GaussianGradient, MatchesFiniteDifference) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int d = 2 + rep % 5;
    const Matrix S = random_spd(d, rng);
    Vector v(static_cast<Eigen::Index>(edge_count(d)));
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = u(rng);
    const double gamma = max_eigenvalue_symmetric(apply_t(v, d)) + 0.5 + u(rng);
    const Vector grad = gaussian_laplacian_gradient(gamma, S, 0.1, 2.0, v, d);
    Vector fd(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      const double h = 1e-6;
      Vector vp = v, vm = v;
      vp(k) += h;
      vm(k) -= h;
      fd(k) = (*gaussian_laplacian_objective(gamma, S, 0.1, 2.0, vp, d) -
               *gaussian_laplacian_objective(gamma, S, 0.1, 2.0, vm, d)) /
              (2 * h);
    }
    EXPECT_LE((grad - fd).cwiseAbs().maxCoeff(), 1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
  }
}

EmpiricalMoments moments_from(const Matrix& S) {
  EmpiricalMoments m;
  m.mean = Vector::Zero(S.rows());
  m.covariance = S;
  m.second_moment = S;
  m.samples = 1;
  return m;
}

Matrix complete_graph_model(const Vector& w, int d) {
  const Matrix L = apply_t(w, d);
  return L.completeOrthogonalDecomposition().pseudoInverse() + 0.05 * Matrix::Identity(d, d);
}

TEST(SolveGaussian, MatchesGridSearchAtDimensionThree) {
  const Matrix S = complete_graph_model(Vector{{1.0, 0.4, 0.2}}, 3);
  GaussianSolverConfig cfg;
  cfg.epsilon = 0.1;
  const double beta = cfg.beta_for(3);
  const GaussianSolveResult res = solve_gaussian(moments_from(S), cfg);
  ASSERT_FALSE(res.objective_trace.empty());
  const double solver_value = res.objective_trace.back();

  double grid_best = std::numeric_limits<double>::infinity();
  const int steps = 30;
  for (int a = 0; a <= steps; ++a)
    for (int b = 0; b <= steps; ++b)
      for (int c = 0; c <= steps; ++c) {
        const Vector v{{1.5 * a / steps, 1.5 * b / steps, 1.5 * c / steps}};
        const Matrix L = apply_t(v, 3);
        const double lam = max_eigenvalue_symmetric(L);
        const double pen = beta * std::pow(L.trace() - 3.0, 2);
        for (int k = 0; k < 120; ++k) {
          const double gamma = lam + std::exp(-7.0 + 14.0 * k / 119.0);
          grid_best = std::min(grid_best, g_direct(gamma, L, S, cfg.epsilon, cfg.eta) + pen);
        }
      }
  EXPECT_LE(solver_value, grid_best * 1.05);
  EXPECT_GE(solver_value, grid_best * 0.95);
}

TEST(SolveGaussian, TraceMonotoneAndOutputValid) {
  std::mt19937_64 rng(21);
  for (int d : {3, 5, 8}) {
    GaussianSolverConfig cfg;
    cfg.epsilon = 0.3;
    const Matrix S = random_spd(d, rng);
    const GaussianSolveResult res = solve_gaussian(moments_from(S), cfg);
    for (std::size_t k = 1; k < res.objective_trace.size(); ++k) {
      EXPECT_LE(res.objective_trace[k], res.objective_trace[k - 1] + 1e-8);
    }
    EXPECT_TRUE(validate_laplacian(res.laplacian.matrix(), 1e-8).ok());
    EXPECT_EQ(res.laplacian.trace(), static_cast<double>(d));
    EXPECT_GT(res.gamma, max_eigenvalue(res.laplacian));
    EXPECT_EQ(res.worst_case_risk, eval_g(res.gamma, res.laplacian, S, 0.3, cfg.eta));
  }
}

TEST(SolveGaussian, SmallRadiusApproachesSaa) {
  std::mt19937_64 rng(33);
  const Matrix S = random_spd(5, rng);
  GaussianSolverConfig cfg;
  cfg.epsilon = 1e-4;
  const GaussianSolveResult robust = solve_gaussian(moments_from(S), cfg);
  const GeneralSolveResult saa = solve_saa(S, cfg.eta, std::nullopt, uniform_complete_weights(5));
  EXPECT_LE(dog(robust.laplacian, saa.laplacian), 0.05);
}

TEST(SolveGaussian, RejectsZeroRadius) {
  GaussianSolverConfig cfg;
  cfg.epsilon = 0.0;
  EXPECT_THROW(solve_gaussian(moments_from(Matrix::Identity(3, 3)), cfg), std::invalid_argument);
  cfg.epsilon = 0.1;
  cfg.bracket_a = 0.5;
  EXPECT_THROW(solve_gaussian(moments_from(Matrix::Identity(3, 3)), cfg), std::invalid_argument);
}

}  // namespace
}  // namespace wrgl
