#pragma once

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

namespace wrgl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Number of free edge weights of a d-vertex undirected graph, d(d-1)/2.
std::size_t edge_count(int d);

/// Linear position of the lower-triangle entry (i, j), i > j, in a weight
/// vector. Indices are 1-based and the ordering is column-major over the
/// strict lower triangle: (2,1), (3,1), ..., (d,1), (3,2), ...
///
/// Throws std::invalid_argument unless 1 <= j < i <= d.
std::size_t index_map(int i, int j, int d);

/// Inverse of index_map: the 1-based (i, j) pair for 1-based position k.
std::pair<int, int> edge_of(std::size_t k, int d);

/// Nonnegative edge weights of a d-vertex graph, ordered per index_map.
class WeightVector {
 public:
  /// Throws std::invalid_argument for d < 2, a length mismatch, or any
  /// negative or non-finite entry.
  WeightVector(int d, Vector values);

  static WeightVector zeros(int d);
  static WeightVector constant(int d, double weight);

  int dim() const { return d_; }
  std::size_t size() const { return static_cast<std::size_t>(values_.size()); }
  const Vector& values() const { return values_; }
  double operator[](std::size_t k) const { return values_(static_cast<Eigen::Index>(k)); }

 private:
  int d_;
  Vector values_;
};

struct ConstraintReport {
  bool symmetric = false;
  bool zero_row_sums = false;
  bool offdiag_sign = false;
  bool psd = false;
  double trace_value = 0.0;

  bool ok() const { return symmetric && zero_row_sums && offdiag_sign && psd; }
};

/// Checks membership in the set of graph Laplacians at tolerance `tol`.
/// The PSD check uses a fixed slack of 1e-8 scaled by the largest entry.
ConstraintReport validate_laplacian(const Matrix& m, double tol = 1e-10);

/// A combinatorial graph Laplacian: symmetric, zero row sums, nonpositive
/// off-diagonal entries. Immutable once built.
class Laplacian {
 public:
  /// Validates `m` at `tol` and throws std::invalid_argument if it is not a
  /// Laplacian. Tiny asymmetries are symmetrized away.
  static Laplacian from_matrix(const Matrix& m, double tol = 1e-10);

  static Laplacian zero(int d);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

  /// Edge weight between 0-based vertices a != b, i.e. -L(a, b).
  double weight(int a, int b) const { return -m_(a, b); }
  double trace() const { return m_.trace(); }

 private:
  explicit Laplacian(Matrix m) : m_(std::move(m)) {}
  friend Laplacian weights_to_laplacian(const WeightVector& v);

  Matrix m_;
};

/// Operator T on an arbitrary (possibly signed) coefficient vector. The
/// result has zero row sums and is symmetric; it is a Laplacian only when
/// every coefficient is nonnegative.
Matrix apply_t(const Vector& v, int d);

/// Adjoint T*: [T*V]_k = V_ii - V_ij - V_ji + V_jj. Accepts any square
/// matrix; the identity <Tv, V> = <v, T*V> holds for all of them.
Vector apply_t_adjoint(const Matrix& V);

Laplacian weights_to_laplacian(const WeightVector& v);

/// T* restricted to symmetric input. Throws std::invalid_argument for a
/// non-square matrix or asymmetry beyond 1e-10.
Vector adjoint_weights(const Matrix& V);

/// Edge weights of a Laplacian (clamped at zero against round-off).
WeightVector laplacian_to_weights(const Laplacian& L);

double max_eigenvalue(const Laplacian& L);
double max_eigenvalue_symmetric(const Matrix& m);

/// Removes edges whose weight is strictly below `threshold` and rebuilds the
/// diagonal so rows still sum to zero.
Laplacian prune_edges(const Laplacian& L, double threshold);

/// Uniform complete graph normalized to trace d.
WeightVector uniform_complete_weights(int d);

/// Scales the weights so that Tr(Tv) == d to the last bit when possible.
WeightVector normalize_trace(const WeightVector& v);

}  // namespace wrgl
