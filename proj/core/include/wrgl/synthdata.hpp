#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wrgl/graph.hpp"
#include "wrgl/moments.hpp"
#include "wrgl/random.hpp"

namespace wrgl {

struct RbfGraphSpec {
  Matrix coords;  // d x 2, points in the unit square
  double sigma = 0.5;
  double tau = 0.7;
};

struct SbmGraphSpec {
  std::vector<int> cluster_sizes;
  double p_in = 0.3;
  double p_out = 0.02;
  std::uint64_t seed = 0;
};

struct SbmGraph {
  Laplacian laplacian;
  std::vector<int> labels;  // cluster index per vertex
};

/// d points drawn uniformly from the unit square.
Matrix random_coordinates(int d, std::uint64_t seed);

/// Edge (i, j) gets weight exp(-dist^2 / 2 sigma^2) when that value is
/// strictly greater than tau, otherwise no edge.
Laplacian rbf_graph(const RbfGraphSpec& spec);

/// Independent unit-weight edges: p_in within a cluster, p_out across.
SbmGraph sbm_graph(const SbmGraphSpec& spec);

/// N draws of x = U Lambda^{+1/2} z, z ~ N(0, I): samples of N(0, L^+).
/// Eigenvalues below 1e-10 * lambda_max count as zero.
SignalMatrix sample_smooth_signals(const Laplacian& L, int N, std::uint64_t seed,
                                   std::uint64_t stream = streams::kSignals);

/// Adds i.i.d. N(0, sigma_w^2) noise entrywise.
SignalMatrix add_noise(const SignalMatrix& X, double sigma_w, std::uint64_t seed,
                       std::uint64_t stream = streams::kNoise);

struct Dataset {
  Laplacian groundtruth;
  std::optional<std::vector<int>> labels;
  SignalMatrix signals;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

struct RbfDatasetSpec {
  int d = 20;
  double sigma = 0.5;
  double tau = 0.7;
  int samples = 100;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

struct SbmDatasetSpec {
  std::vector<int> cluster_sizes{15, 15, 15};
  double p_in = 0.3;
  double p_out = 0.02;
  int samples = 100;
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
};

Dataset make_rbf_dataset(const RbfDatasetSpec& spec);
Dataset make_sbm_dataset(const SbmDatasetSpec& spec);

}  // namespace wrgl
