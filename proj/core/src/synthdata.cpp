#include "wrgl/synthdata.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "wrgl/random.hpp"

namespace wrgl {

Matrix random_coordinates(int d, std::uint64_t seed) {
  if (d < 2) throw std::invalid_argument("need at least 2 vertices");
  CounterRng rng(seed, streams::kCoordinates);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Matrix coords(d, 2);
  for (int i = 0; i < d; ++i) {
    coords(i, 0) = unit(rng);
    coords(i, 1) = unit(rng);
  }
  return coords;
}

Laplacian rbf_graph(const RbfGraphSpec& spec) {
  const Matrix& c = spec.coords;
  if (c.cols() != 2 || c.rows() < 2) {
    throw std::invalid_argument("rbf_graph needs a d x 2 coordinate matrix with d >= 2");
  }
  if ((c.array() < 0.0).any() || (c.array() > 1.0).any()) {
    throw std::invalid_argument("rbf_graph coordinates must lie in the unit square");
  }
  if (!(spec.sigma > 0.0)) throw std::invalid_argument("rbf_graph needs sigma > 0");
  if (!(spec.tau >= 0.0 && spec.tau <= 1.0)) throw std::invalid_argument("rbf_graph needs tau in [0, 1]");

  const int d = static_cast<int>(c.rows());
  Vector w(static_cast<Eigen::Index>(edge_count(d)));
  Eigen::Index k = 0;
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a, ++k) {
      const double dist_sq = (c.row(a) - c.row(b)).squaredNorm();
      const double sim = std::exp(-dist_sq / (2.0 * spec.sigma * spec.sigma));
      w(k) = sim > spec.tau ? sim : 0.0;
    }
  }
  return weights_to_laplacian(WeightVector(d, std::move(w)));
}

SbmGraph sbm_graph(const SbmGraphSpec& spec) {
  if (spec.cluster_sizes.empty()) throw std::invalid_argument("sbm_graph needs clusters");
  if (!(spec.p_out >= 0.0 && spec.p_out <= spec.p_in && spec.p_in <= 1.0)) {
    throw std::invalid_argument("sbm_graph needs 0 <= p_out <= p_in <= 1");
  }
  std::vector<int> labels;
  for (std::size_t c = 0; c < spec.cluster_sizes.size(); ++c) {
    if (spec.cluster_sizes[c] < 1) throw std::invalid_argument("cluster sizes must be positive");
    labels.insert(labels.end(), static_cast<std::size_t>(spec.cluster_sizes[c]), static_cast<int>(c));
  }
  const int d = static_cast<int>(labels.size());
  if (d < 2) throw std::invalid_argument("sbm_graph needs at least 2 vertices");

  CounterRng rng(spec.seed, streams::kBlockModel);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector w(static_cast<Eigen::Index>(edge_count(d)));
  Eigen::Index k = 0;
  for (int b = 0; b < d; ++b) {
    for (int a = b + 1; a < d; ++a, ++k) {
      const double p = labels[static_cast<std::size_t>(a)] == labels[static_cast<std::size_t>(b)]
                           ? spec.p_in
                           : spec.p_out;
      w(k) = unit(rng) < p ? 1.0 : 0.0;
    }
  }
  return SbmGraph{weights_to_laplacian(WeightVector(d, std::move(w))), std::move(labels)};
}

SignalMatrix sample_smooth_signals(const Laplacian& L, int N, std::uint64_t seed,
                                   std::uint64_t stream) {
  if (N < 1) throw std::invalid_argument("need at least one sample");
  const int d = L.dim();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(L.matrix());
  const Vector& lambda = eig.eigenvalues();
  const double cutoff = 1e-10 * std::max(0.0, lambda.maxCoeff());

  Vector scale(d);
  for (int k = 0; k < d; ++k) {
    scale(k) = (lambda(k) > cutoff && lambda(k) > 0.0) ? 1.0 / std::sqrt(lambda(k)) : 0.0;
  }
  const Matrix factor = eig.eigenvectors() * scale.asDiagonal();

  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Z(d, N);
  for (int n = 0; n < N; ++n) {
    for (int i = 0; i < d; ++i) Z(i, n) = normal(rng);
  }
  return factor * Z;
}

SignalMatrix add_noise(const SignalMatrix& X, double sigma_w, std::uint64_t seed,
                       std::uint64_t stream) {
  if (!(sigma_w >= 0.0)) throw std::invalid_argument("noise level must be >= 0");
  if (sigma_w == 0.0) return X;
  CounterRng rng(seed, stream);
  std::normal_distribution<double> normal(0.0, sigma_w);
  SignalMatrix out = X;
  for (Eigen::Index n = 0; n < out.cols(); ++n) {
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, n) += normal(rng);
  }
  return out;
}

Dataset make_rbf_dataset(const RbfDatasetSpec& spec) {
  if (spec.samples < 1) throw std::invalid_argument("dataset needs at least one sample");
  RbfGraphSpec graph{random_coordinates(spec.d, spec.seed), spec.sigma, spec.tau};
  Laplacian gt = rbf_graph(graph);
  SignalMatrix clean = sample_smooth_signals(gt, spec.samples, spec.seed);
  SignalMatrix noisy = add_noise(clean, spec.noise_sigma, spec.seed);
  return Dataset{std::move(gt), std::nullopt, std::move(noisy), spec.noise_sigma, spec.seed};
}

Dataset make_sbm_dataset(const SbmDatasetSpec& spec) {
  if (spec.samples < 1) throw std::invalid_argument("dataset needs at least one sample");
  SbmGraph graph = sbm_graph(SbmGraphSpec{spec.cluster_sizes, spec.p_in, spec.p_out, spec.seed});
  SignalMatrix clean = sample_smooth_signals(graph.laplacian, spec.samples, spec.seed);
  SignalMatrix noisy = add_noise(clean, spec.noise_sigma, spec.seed);
  return Dataset{std::move(graph.laplacian), std::move(graph.labels), std::move(noisy),
                 spec.noise_sigma, spec.seed};
}

}  // namespace wrgl
