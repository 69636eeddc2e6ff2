#include "wrgl/projected_gradient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wrgl {

namespace {

constexpr double kMaxStep = 1e12;

Vector project(const Vector& x) { return x.cwiseMax(0.0); }

}  // namespace

PgdOutcome projected_gradient_descent(const PgdObjective& objective, const PgdGradient& gradient,
                                      Vector x0, const PgdOptions& options) {
  if ((x0.array() < 0.0).any()) {
    throw std::invalid_argument("projected gradient needs a nonnegative start");
  }
  const std::optional<double> f0 = objective(x0);
  if (!f0 || !std::isfinite(*f0)) {
    throw std::invalid_argument("projected gradient start is outside the objective domain");
  }

  PgdOutcome out;
  out.x = std::move(x0);
  out.objective = *f0;

  Vector g = gradient(out.x);
  Vector x_prev;
  Vector g_prev;
  double step = options.ls_init;

  for (int it = 1; it <= options.max_iter; ++it) {
    if (it > 1) {
      const Vector s = out.x - x_prev;
      const Vector y = g - g_prev;
      const double sy = s.dot(y);
      if (sy > 0.0) {
        step = std::clamp(s.squaredNorm() / sy, options.min_step, kMaxStep);
      } else {
        step = std::min(2.0 * step, kMaxStep);
      }
    }

    bool accepted = false;
    Vector x_new;
    double f_new = 0.0;
    while (step >= options.min_step) {
      x_new = project(out.x - step * g);
      if (x_new == out.x) {
        // Projected gradient is zero: first-order stationary.
        out.iterations = it;
        out.converged = true;
        return out;
      }
      const std::optional<double> f = objective(x_new);
      const double floor = 1e-14 * std::max(1.0, std::abs(out.objective));
      if (f && std::isfinite(*f) && *f <= out.objective &&
          *f <= out.objective + options.ls_c * g.dot(x_new - out.x) + floor) {
        f_new = *f;
        accepted = true;
        break;
      }
      step *= options.ls_shrink;
    }

    if (!accepted && options.nonsmooth) {
      // Diminishing step, kept only if it lowers the objective.
      for (double s = options.ls_init / std::sqrt(static_cast<double>(it)); s >= options.min_step;
           s *= options.ls_shrink) {
        x_new = project(out.x - s * g);
        const std::optional<double> f = objective(x_new);
        if (f && std::isfinite(*f) && *f < out.objective) {
          f_new = *f;
          step = s;
          accepted = true;
          break;
        }
      }
    }

    if (!accepted) {
      out.iterations = it;
      out.converged = false;
      return out;
    }

    const double moved = (x_new - out.x).norm();
    x_prev = std::move(out.x);
    g_prev = std::move(g);
    out.x = std::move(x_new);
    out.objective = f_new;
    out.trace.push_back(f_new);
    out.iterations = it;
    if (moved < options.tol) {
      out.converged = true;
      return out;
    }
    g = gradient(out.x);
  }
  return out;
}

}  // namespace wrgl
