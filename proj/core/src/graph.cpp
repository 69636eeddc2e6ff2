#include "wrgl/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace wrgl {

namespace {

void require_dim(int d) {
  if (d < 2) {
    throw std::invalid_argument("graph needs at least 2 vertices, got d=" + std::to_string(d));
  }
}

// 0-based position of 0-based (a, b), a > b. Same ordering as index_map.
inline Eigen::Index lower_index(int a, int b, int d) {
  return static_cast<Eigen::Index>(a - b - 1) +
         static_cast<Eigen::Index>(b) * (2 * d - b - 1) / 2;
}

}  // namespace

std::size_t edge_count(int d) {
  require_dim(d);
  return static_cast<std::size_t>(d) * static_cast<std::size_t>(d - 1) / 2;
}

std::size_t index_map(int i, int j, int d) {
  require_dim(d);
  if (j < 1 || i <= j || i > d) {
    throw std::invalid_argument("index_map requires 1 <= j < i <= d, got i=" + std::to_string(i) +
                                " j=" + std::to_string(j) + " d=" + std::to_string(d));
  }
  // k = i - j + (j - 1)(2d - j)/2; (j-1)(2d-j) is always even.
  return static_cast<std::size_t>(i - j) +
         static_cast<std::size_t>(j - 1) * static_cast<std::size_t>(2 * d - j) / 2;
}

std::pair<int, int> edge_of(std::size_t k, int d) {
  const std::size_t m = edge_count(d);
  if (k < 1 || k > m) {
    throw std::invalid_argument("edge_of: k=" + std::to_string(k) + " outside [1, " +
                                std::to_string(m) + "]");
  }
  // Column j holds d - j entries.
  std::size_t remaining = k;
  int j = 1;
  while (remaining > static_cast<std::size_t>(d - j)) {
    remaining -= static_cast<std::size_t>(d - j);
    ++j;
  }
  return {j + static_cast<int>(remaining), j};
}

WeightVector::WeightVector(int d, Vector values) : d_(d), values_(std::move(values)) {
  const std::size_t m = edge_count(d);
  if (static_cast<std::size_t>(values_.size()) != m) {
    throw std::invalid_argument("weight vector for d=" + std::to_string(d) + " needs " +
                                std::to_string(m) + " entries, got " +
                                std::to_string(values_.size()));
  }
  for (Eigen::Index k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_(k)) || values_(k) < 0.0) {
      throw std::invalid_argument("edge weights must be finite and nonnegative");
    }
  }
}

WeightVector WeightVector::zeros(int d) {
  return WeightVector(d, Vector::Zero(static_cast<Eigen::Index>(edge_count(d))));
}

WeightVector WeightVector::constant(int d, double weight) {
  return WeightVector(d, Vector::Constant(static_cast<Eigen::Index>(edge_count(d)), weight));
}

Matrix apply_t(const Vector& v, int d) {
  if (static_cast<std::size_t>(v.size()) != edge_count(d)) {
    throw std::invalid_argument("apply_t: vector length does not match d(d-1)/2");
  }
  Matrix L = Matrix::Zero(d, d);
  Eigen::Index k = 0;
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a, ++k) {
      L(a, b) = -v(k);
      L(b, a) = -v(k);
    }
  }
  for (int a = 0; a < d; ++a) {
    double s = 0.0;
    for (int b = 0; b < d; ++b) {
      if (b != a) s += L(a, b);
    }
    L(a, a) = -s;
  }
  return L;
}

Vector apply_t_adjoint(const Matrix& V) {
  if (V.rows() != V.cols()) {
    throw std::invalid_argument("adjoint operator needs a square matrix");
  }
  const int d = static_cast<int>(V.rows());
  Vector out(static_cast<Eigen::Index>(edge_count(d)));
  Eigen::Index k = 0;
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a, ++k) {
      out(k) = V(a, a) - V(a, b) - V(b, a) + V(b, b);
    }
  }
  return out;
}

Laplacian weights_to_laplacian(const WeightVector& v) {
  return Laplacian(apply_t(v.values(), v.dim()));
}

Vector adjoint_weights(const Matrix& V) {
  if (V.rows() != V.cols()) {
    throw std::invalid_argument("adjoint_weights needs a square matrix");
  }
  const double scale = std::max(1.0, V.cwiseAbs().maxCoeff());
  if ((V - V.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("adjoint_weights needs a symmetric matrix");
  }
  return apply_t_adjoint(V);
}

ConstraintReport validate_laplacian(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("validate_laplacian needs a square matrix");
  }
  ConstraintReport report;
  const Eigen::Index d = m.rows();
  report.trace_value = m.trace();

  report.symmetric = true;
  report.offdiag_sign = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      if (std::abs(m(i, j) - m(j, i)) > tol * std::max(1.0, std::abs(m(i, j)))) {
        report.symmetric = false;
      }
      if (m(i, j) > tol) report.offdiag_sign = false;
    }
  }

  report.zero_row_sums = true;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(m.row(i).sum()) > tol * std::max(1.0, std::abs(m(i, i)))) {
      report.zero_row_sums = false;
    }
  }

  if (d == 0 || !m.allFinite()) {
    report.psd = false;
  } else {
    const Matrix sym = 0.5 * (m + m.transpose());
    const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly)
                               .eigenvalues()
                               .minCoeff();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    report.psd = min_eig >= -1e-8 * scale;
  }
  return report;
}

Laplacian Laplacian::from_matrix(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("Laplacian must be square");
  }
  require_dim(static_cast<int>(m.rows()));
  const ConstraintReport report = validate_laplacian(m, tol);
  if (!report.ok()) {
    std::string why;
    if (!report.symmetric) why += " not symmetric;";
    if (!report.zero_row_sums) why += " nonzero row sums;";
    if (!report.offdiag_sign) why += " positive off-diagonal entry;";
    if (!report.psd) why += " not PSD;";
    throw std::invalid_argument("matrix is not a graph Laplacian:" + why);
  }
  return Laplacian(0.5 * (m + m.transpose()));
}

Laplacian Laplacian::zero(int d) {
  require_dim(d);
  return Laplacian(Matrix::Zero(d, d));
}

WeightVector laplacian_to_weights(const Laplacian& L) {
  const int d = L.dim();
  Vector v(static_cast<Eigen::Index>(edge_count(d)));
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a) {
      v(lower_index(a, b, d)) = std::max(0.0, -L.matrix()(a, b));
    }
  }
  return WeightVector(d, std::move(v));
}

double max_eigenvalue_symmetric(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  return Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
}

double max_eigenvalue(const Laplacian& L) { return max_eigenvalue_symmetric(L.matrix()); }

Laplacian prune_edges(const Laplacian& L, double threshold) {
  if (threshold < 0.0) {
    throw std::invalid_argument("prune threshold must be nonnegative");
  }
  const WeightVector w = laplacian_to_weights(L);
  Vector kept = w.values();
  for (Eigen::Index k = 0; k < kept.size(); ++k) {
    if (kept(k) < threshold) kept(k) = 0.0;
  }
  return weights_to_laplacian(WeightVector(L.dim(), std::move(kept)));
}

WeightVector uniform_complete_weights(int d) {
  return normalize_trace(WeightVector::constant(d, 1.0 / static_cast<double>(d - 1)));
}

namespace {

// Moves weight k until the computed trace of T v equals `target` exactly,
// bisecting over doubles.
bool hit_trace(Vector& v, int d, Eigen::Index k, double target) {
  const double original = v(k);
  auto trace_at = [&](double w) {
    v(k) = w;
    return apply_t(v, d).trace();
  };
  const double tr = trace_at(original);
  if (tr == target) return true;
  double step = std::abs(target - tr);
  double lo = original;
  double hi = original;
  if (tr < target) {
    for (hi = original + step; trace_at(hi) < target; hi = original + step) step *= 2.0;
  } else {
    for (lo = std::max(0.0, original - step); lo > 0.0 && trace_at(lo) > target;
         lo = std::max(0.0, original - step)) {
      step *= 2.0;
    }
    if (trace_at(lo) > target) {
      v(k) = original;
      return false;
    }
  }
  for (int it = 0; it < 2100; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double t = trace_at(mid);
    if (t == target) return true;
    (t < target ? lo : hi) = mid;
  }
  if (trace_at(lo) == target || trace_at(hi) == target) return true;
  v(k) = original;
  return false;
}

}  // namespace

WeightVector normalize_trace(const WeightVector& v) {
  const int d = v.dim();
  const double total = v.values().sum();
  if (!(total > 0.0)) {
    throw std::invalid_argument("cannot normalize the trace of an empty graph");
  }
  Vector scaled = v.values() * (static_cast<double>(d) / (2.0 * total));
  if (apply_t(scaled, d).trace() != static_cast<double>(d)) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(scaled.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return scaled(a) > scaled(b); });
    for (Eigen::Index k : order) {
      if (scaled(k) == 0.0 || hit_trace(scaled, d, k, static_cast<double>(d))) break;
    }
  }
  return WeightVector(d, std::move(scaled));
}

}  // namespace wrgl
