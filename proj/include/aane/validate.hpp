#pragma once

#include "aane/cluster.hpp"
#include "aane/embed.hpp"
#include "aane/graph.hpp"
#include "aane/kernels.hpp"
#include "aane/types.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace aane::validate {

struct SilhouetteValues {
  std::vector<double> values;  // per point, in [-1, 1]; singletons score 0
  double average = 0.0;
};

/// Euclidean silhouette. Labels must be in [0, K) with every cluster non-empty.
/// Throws SingleCluster when K = 1.
SilhouetteValues silhouette(const Matrix& points, std::span<const int> labels,
                            kernels::Backend backend = kernels::Backend::OpenMP);

/// Minimum inter-cluster point distance over the maximum cluster diameter.
/// Throws ZeroDiameter when every cluster has zero diameter.
double dunn_index(const Matrix& points, std::span<const int> labels,
                  kernels::Backend backend = kernels::Backend::OpenMP);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct SilhouetteReport {
  std::vector<int> ks;
  std::vector<cluster::Method> methods;
  // per_timestep[t][ki][mi] and mean[ki][mi] (mean over timesteps).
  std::vector<std::vector<std::vector<double>>> per_timestep;
  std::vector<std::vector<double>> mean;

  /// K with the highest week-averaged silhouette for one method.
  int best_k(cluster::Method method) const;
  /// Best (K, method) over the whole table; ties favour smaller K, then method order.
  std::pair<int, cluster::Method> best() const;
  /// 1-based rank of k among the sweep for a method (1 = highest silhouette).
  int rank_of(int k, cluster::Method method) const;
};

/// Builds the table from existing assignments (one per timestep, K and method).
SilhouetteReport silhouette_report(std::span<const Matrix> embeddings,
                                   std::span<const cluster::ClusterAssignment> assignments,
                                   std::span<const int> ks,
                                   std::span<const cluster::Method> methods);

/// Fits every (timestep, K, method) and tabulates the average silhouettes.
SilhouetteReport select_k(std::span<const Matrix> embeddings, std::span<const int> ks,
                          std::span<const cluster::Method> methods, std::uint64_t seed,
                          const cluster::FitOptions& options = {});

struct StabilityMeasures {
  double apn = 0.0;  // average proportion of non-overlap, in [0, 1]
  double ad = 0.0;   // average distance
  double adm = 0.0;  // average distance between cluster means
  double fom = 0.0;  // figure of merit
};

/// Leave-one-column-out measures for one timestep.
///   points     N x p matrix in which distances and cluster means are taken
///   reference  labels of the full-data clustering
///   reduced    reduced[l] = labels after deleting column l
///   held_out   N x M matrix; column l holds the deleted column's values
/// Every measure is averaged over the M deleted columns.
StabilityMeasures stability_measures(const Matrix& points, std::span<const int> reference,
                                     std::span<const std::vector<int>> reduced,
                                     const Matrix& held_out);

struct StabilityReport {
  int k = 0;
  std::vector<cluster::Method> methods;
  std::vector<StabilityMeasures> average;                   // per method
  std::vector<std::vector<StabilityMeasures>> per_timestep; // [t][method]
  // ranks[m][measure] with 1 = best (smallest) for APN, AD, ADM, FOM.
  std::vector<std::array<int, 4>> ranks;

  /// Method with the smallest rank sum; ties go to the lower APN, then list order.
  cluster::Method preferred() const;
};

struct StabilityInput {
  const graph::AttributedNetwork* network = nullptr;
  const Matrix* embedding = nullptr;  // full-data embedding of `network`
  // Full-data reference labels per method, aligned with `methods`.
  std::vector<const cluster::ClusterAssignment*> reference;
};

/// Re-runs similarity -> embed -> cluster with each attribute column deleted
/// and scores the result against the full-data clustering. AD and ADM are
/// measured in the full-data embedding space.
StabilityReport stability(std::span<const StabilityInput> timesteps,
                          const embed::SolverConfig& solver, int k,
                          std::span<const cluster::Method> methods, std::uint64_t seed,
                          const cluster::FitOptions& options = {});

}  // namespace aane::validate
