#pragma once

#include <optional>
#include <vector>

#include "wrgl/graph.hpp"
#include "wrgl/moments.hpp"

namespace wrgl {

inline constexpr double kDefaultEdgeThreshold = 1e-4;

/// Edge-presence decisions over the d(d-1)/2 vertex pairs; an edge is
/// present when its weight is strictly greater than the threshold.
struct ConfusionCounts {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;
};

ConfusionCounts confusion_counts(const Laplacian& learned, const Laplacian& truth,
                                 double edge_threshold = kDefaultEdgeThreshold);

/// Matthews correlation coefficient; 0 when any marginal is empty.
double mcc(const ConfusionCounts& c);
double mcc(const Laplacian& learned, const Laplacian& truth,
           double edge_threshold = kDefaultEdgeThreshold);

/// ||L* - L_gt||_F / ||L_gt||_F. Throws std::invalid_argument for a zero
/// ground truth or mismatched sizes.
double dog(const Laplacian& learned, const Laplacian& truth);

/// Fraction of test columns whose risk x^T L* x + eta ||L*||_F^2 is below R*.
double reliability(const SignalMatrix& test, const Laplacian& learned, double eta,
                   double worst_case_risk);

/// Normalized mutual information, 2 I(a; b) / (H(a) + H(b)). Two constant
/// labelings score 1; a constant labeling against a non-constant one scores 0.
double nmi(const std::vector<int>& a, const std::vector<int>& b);

/// Type-2 Wasserstein distance between N(mu1, S1) and N(mu2, S2). Throws
/// std::invalid_argument for non-PSD (below -1e-10 relative) covariances.
double wasserstein2_gaussian(const Vector& mu1, const Matrix& sigma1, const Vector& mu2,
                             const Matrix& sigma2);

/// Symmetric PSD square root via eigen-decomposition (negative round-off
/// eigenvalues clamp to zero).
Matrix psd_sqrt(const Matrix& m);

struct MetricsReport {
  double mcc = 0.0;
  double dog = 0.0;
  std::optional<double> reliability;
  std::optional<double> nmi;
};

}  // namespace wrgl
