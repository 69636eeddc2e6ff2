#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "wrgl/graph.hpp"

namespace wrgl {

struct PgdOptions {
  double tol = 1e-7;         // stop once ||x_k - x_{k-1}||_2 < tol
  int max_iter = 20000;
  double ls_init = 1.0;      // trial step of the first iteration
  double ls_shrink = 0.5;
  double ls_c = 1e-4;        // Armijo constant
  double min_step = 1e-14;
  bool nonsmooth = false;    // enables the diminishing-step fallback
};

struct PgdOutcome {
  Vector x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> trace;  // objective after every accepted step
};

/// Objective value, or nullopt when the point is outside the domain.
using PgdObjective = std::function<std::optional<double>(const Vector&)>;
using PgdGradient = std::function<Vector(const Vector&)>;

/// Projected gradient descent over the nonnegative orthant,
/// x <- max(x - s * grad, 0), with backtracking (Armijo along the projection
/// arc). Trial steps after the first are Barzilai-Borwein estimates. Accepted
/// steps never raise the objective.
///
/// `x0` must be nonnegative and inside the domain; throws std::invalid_argument
/// otherwise.
PgdOutcome projected_gradient_descent(const PgdObjective& objective, const PgdGradient& gradient,
                                      Vector x0, const PgdOptions& options);

}  // namespace wrgl
