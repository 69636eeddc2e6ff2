#include "wrgl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace wrgl {

namespace {

void require_same_dim(const Laplacian& a, const Laplacian& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("Laplacian dimensions differ");
}

double entropy(const std::map<int, long>& counts, double n) {
  double h = 0.0;
  for (const auto& [label, c] : counts) {
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  return h;
}

void require_psd(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("covariance must be square");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw std::invalid_argument("covariance must be symmetric");
  }
  const double min_eig = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly)
                             .eigenvalues()
                             .minCoeff();
  if (min_eig < -1e-10 * scale) throw std::invalid_argument("covariance must be PSD");
}

}  // namespace

ConfusionCounts confusion_counts(const Laplacian& learned, const Laplacian& truth,
                                 double edge_threshold) {
  require_same_dim(learned, truth);
  if (!(edge_threshold >= 0.0)) throw std::invalid_argument("edge threshold must be >= 0");
  ConfusionCounts c;
  const int d = truth.dim();
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a) {
      const bool predicted = learned.weight(a, b) > edge_threshold;
      const bool actual = truth.weight(a, b) > edge_threshold;
      if (predicted && actual) ++c.tp;
      else if (!predicted && !actual) ++c.tn;
      else if (predicted) ++c.fp;
      else ++c.fn;
    }
  }
  return c;
}

double mcc(const ConfusionCounts& c) {
  const double tp = static_cast<double>(c.tp);
  const double tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp);
  const double fn = static_cast<double>(c.fn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

double mcc(const Laplacian& learned, const Laplacian& truth, double edge_threshold) {
  return mcc(confusion_counts(learned, truth, edge_threshold));
}

double dog(const Laplacian& learned, const Laplacian& truth) {
  require_same_dim(learned, truth);
  const double denom = truth.matrix().norm();
  if (denom == 0.0) throw std::invalid_argument("DOG is undefined for a zero ground truth");
  return (learned.matrix() - truth.matrix()).norm() / denom;
}

double reliability(const SignalMatrix& test, const Laplacian& learned, double eta,
                   double worst_case_risk) {
  if (test.rows() != learned.dim()) {
    throw std::invalid_argument("test signals do not match the Laplacian dimension");
  }
  if (test.cols() == 0) throw std::invalid_argument("reliability needs test samples");
  const double offset = eta * learned.matrix().squaredNorm();
  long below = 0;
  for (Eigen::Index n = 0; n < test.cols(); ++n) {
    const auto x = test.col(n);
    if (x.dot(learned.matrix() * x) + offset < worst_case_risk) ++below;
  }
  return static_cast<double>(below) / static_cast<double>(test.cols());
}

double nmi(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
  if (a.empty()) throw std::invalid_argument("labelings are empty");
  const double n = static_cast<double>(a.size());
  std::map<int, long> ca;
  std::map<int, long> cb;
  std::map<std::pair<int, int>, long> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++ca[a[i]];
    ++cb[b[i]];
    ++joint[{a[i], b[i]}];
  }
  const double ha = entropy(ca, n);
  const double hb = entropy(cb, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (const auto& [key, c] : joint) {
    const double pxy = static_cast<double>(c) / n;
    const double px = static_cast<double>(ca[key.first]) / n;
    const double py = static_cast<double>(cb[key.second]) / n;
    mi += pxy * std::log(pxy / (px * py));
  }
  const double out = 2.0 * mi / (ha + hb);
  return std::clamp(out, 0.0, 1.0);
}

Matrix psd_sqrt(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

double wasserstein2_gaussian(const Vector& mu1, const Matrix& sigma1, const Vector& mu2,
                             const Matrix& sigma2) {
  if (mu1.size() != mu2.size() || sigma1.rows() != mu1.size() || sigma2.rows() != mu2.size()) {
    throw std::invalid_argument("Gaussian parameters have mismatched dimensions");
  }
  require_psd(sigma1);
  require_psd(sigma2);
  const Matrix root2 = psd_sqrt(sigma2);
  const Matrix cross = psd_sqrt(root2 * sigma1 * root2);
  const double cov_term = std::max(0.0, sigma1.trace() + sigma2.trace() - 2.0 * cross.trace());
  return std::sqrt((mu1 - mu2).squaredNorm() + cov_term);
}

}  // namespace wrgl
